#include "gapscope/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace gapscope {

namespace {

void check_dim(const TorusLattice& L, const TorusPoint& p, const char* who) {
  if (p.size() != L.dim())
    throw std::invalid_argument(std::string(who) + ": point dimension mismatch");
}

// exact k x k inverse by Gauss-Jordan
std::vector<std::vector<Rational>> invert(std::vector<std::vector<Rational>> m) {
  const std::size_t k = m.size();
  std::vector<std::vector<Rational>> inv(k, std::vector<Rational>(k, Rational(0)));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    while (pivot < k && m[pivot][col] == 0) ++pivot;
    if (pivot == k) throw std::invalid_argument("TorusLattice: basis is singular");
    std::swap(m[pivot], m[col]);
    std::swap(inv[pivot], inv[col]);
    Rational d = m[col][col];
    for (std::size_t j = 0; j < k; ++j) {
      m[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t j = 0; j < k; ++j) {
        m[r][j] -= f * m[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

}  // namespace

TorusLattice TorusLattice::rectangular(std::vector<Rational> sides) {
  if (sides.empty()) throw std::invalid_argument("TorusLattice: need k >= 1");
  for (const auto& s : sides)
    if (s <= 0) throw std::invalid_argument("TorusLattice: side lengths must be positive");
  TorusLattice L;
  L.k_ = sides.size();
  L.rectangular_ = true;
  L.sides_ = std::move(sides);
  return L;
}

TorusLattice TorusLattice::general(std::vector<std::vector<Rational>> basis_columns) {
  const std::size_t k = basis_columns.size();
  if (k == 0) throw std::invalid_argument("TorusLattice: need k >= 1");
  if (k > 4)
    throw std::invalid_argument("TorusLattice: general-basis mode supports k <= 4 only");
  for (const auto& c : basis_columns)
    if (c.size() != k) throw std::invalid_argument("TorusLattice: basis must be square");

  TorusLattice L;
  L.k_ = k;
  L.rectangular_ = false;
  L.basis_ = std::move(basis_columns);
  // invert() throws on a singular basis
  std::vector<std::vector<Rational>> rows(k, std::vector<Rational>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) rows[i][j] = L.basis_[j][i];  // column -> matrix
  L.basis_inv_ = invert(rows);
  return L;
}

TorusPoint TorusLattice::canonical(const TorusPoint& p) const {
  check_dim(*this, p, "canonical");
  TorusPoint out(k_);
  if (rectangular_) {
    for (std::size_t i = 0; i < k_; ++i) out[i] = mod_interval(p[i], sides_[i]);
    return out;
  }
  // coefficients c = B^-1 p, reduce frac(c), map back
  std::vector<Rational> c(k_, Rational(0));
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) c[i] += basis_inv_[i][j] * p[j];
  for (auto& ci : c) ci = ci - Rational(rational_floor(ci));
  for (std::size_t i = 0; i < k_; ++i) {
    out[i] = 0;
    for (std::size_t j = 0; j < k_; ++j) out[i] += basis_[j][i] * c[j];
  }
  return out;
}

namespace {

// DFS closest-vector enumeration over the general basis with exact pruning.
// Loop bounds come from double square roots widened by one index on each
// side; every candidate is pruned with exact rational partial sums, so the
// result is exact as long as the widened window contains the minimizer
// (Gram-Schmidt interval bound plus margin 1).
struct CvpEnumerator {
  std::size_t k;
  const std::vector<std::vector<Rational>>& cols;
  std::vector<std::vector<Rational>> mu;     // mu[i][j], j < i
  std::vector<Rational> bstar2;              // |b*_i|^2
  std::vector<Rational> tau;                 // target GS coordinates

  Rational best2;
  bool have_best = false;

  CvpEnumerator(const TorusLattice& L, const std::vector<Rational>& target)
      : k(L.dim()), cols(L.basis()) {
    std::vector<std::vector<Rational>> gs(k, std::vector<Rational>(k, Rational(0)));
    mu.assign(k, std::vector<Rational>(k, Rational(0)));
    bstar2.assign(k, Rational(0));
    auto dot = [this](const std::vector<Rational>& a, const std::vector<Rational>& b) {
      Rational r(0);
      for (std::size_t i = 0; i < k; ++i) r += a[i] * b[i];
      return r;
    };
    for (std::size_t i = 0; i < k; ++i) {
      gs[i] = cols[i];
      for (std::size_t j = 0; j < i; ++j) {
        mu[i][j] = dot(cols[i], gs[j]) / bstar2[j];
        for (std::size_t d = 0; d < k; ++d) gs[i][d] -= mu[i][j] * gs[j][d];
      }
      bstar2[i] = dot(gs[i], gs[i]);
      if (bstar2[i] == 0) throw std::invalid_argument("CVP: degenerate basis");
    }
    tau.assign(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i) tau[i] = dot(target, gs[i]) / bstar2[i];
  }

  void search(std::size_t level, std::vector<Rational>& y, const Rational& partial,
              std::vector<Integer>& z) {
    const std::size_t i = level - 1;
    // y_i = tau_i - sum_{j > i} mu_ji z_j  (filled in by the caller)
    const double yi = to_double(y[i]);
    double radius2 = have_best ? to_double((best2 - partial) / bstar2[i]) : 4.0;
    if (radius2 < 0) radius2 = 0;
    const double radius = std::sqrt(radius2);
    long lo = static_cast<long>(std::floor(yi - radius)) - 1;
    long hi = static_cast<long>(std::ceil(yi + radius)) + 1;
    for (long zi = lo; zi <= hi; ++zi) {
      Rational diff = y[i] - Rational(zi);
      Rational contrib = partial + diff * diff * bstar2[i];
      if (have_best && contrib > best2) continue;
      z[i] = zi;
      if (level == 1) {
        if (!have_best || contrib < best2) {
          best2 = contrib;
          have_best = true;
        }
      } else {
        const std::size_t next = level - 2;
        y[next] = tau[next];
        for (std::size_t j = next + 1; j < k; ++j) y[next] -= mu[j][next] * Rational(z[j]);
        search(level - 1, y, contrib, z);
      }
    }
  }

  Rational run() {
    std::vector<Rational> y(k, Rational(0));
    std::vector<Integer> z(k, Integer(0));
    // Babai seed so the first pass already has a tight bound
    {
      std::vector<Integer> zb(k);
      std::vector<Rational> yb(k);
      Rational total(0);
      for (std::size_t idx = k; idx-- > 0;) {
        yb[idx] = tau[idx];
        for (std::size_t j = idx + 1; j < k; ++j) yb[idx] -= mu[j][idx] * Rational(zb[j]);
        Rational rounded = yb[idx] + Rational(1, 2);
        zb[idx] = rational_floor(rounded);
        Rational diff = yb[idx] - Rational(zb[idx]);
        total += diff * diff * bstar2[idx];
      }
      best2 = total;
      have_best = true;
    }
    y[k - 1] = tau[k - 1];
    search(k, y, Rational(0), z);
    return best2;
  }
};

}  // namespace

Rational torus_distance2(const TorusLattice& L, const TorusPoint& x, const TorusPoint& y) {
  check_dim(L, x, "torus_distance2");
  check_dim(L, y, "torus_distance2");
  if (L.is_rectangular()) {
    Rational acc(0);
    for (std::size_t i = 0; i < L.dim(); ++i) {
      Rational d = mod_interval(x[i] - y[i], L.sides()[i]);
      Rational other = L.sides()[i] - d;
      const Rational& m = d < other ? d : other;
      acc += m * m;
    }
    return acc;
  }
  std::vector<Rational> target(L.dim());
  for (std::size_t i = 0; i < L.dim(); ++i) target[i] = x[i] - y[i];
  CvpEnumerator e(L, target);
  return e.run();
}

double torus_distance(const TorusLattice& L, const TorusPoint& x, const TorusPoint& y) {
  return std::sqrt(to_double(torus_distance2(L, x, y)));
}

std::vector<TorusPoint> translation_orbit(const TorusLattice& L, const TorusPoint& v,
                                          const TorusPoint& p0, std::size_t n) {
  check_dim(L, v, "translation_orbit");
  check_dim(L, p0, "translation_orbit");
  if (n < 1) throw std::invalid_argument("translation_orbit: n must be >= 1");
  std::vector<TorusPoint> orbit;
  orbit.reserve(n + 1);
  TorusPoint cur = L.canonical(p0);
  orbit.push_back(cur);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t d = 0; d < L.dim(); ++d) cur[d] += v[d];
    cur = L.canonical(cur);
    orbit.push_back(cur);
  }
  return orbit;
}

std::size_t orbit_period(const TorusLattice& L, const TorusPoint& v, std::size_t limit) {
  TorusPoint zero(L.dim(), Rational(0));
  TorusPoint cur = zero;
  for (std::size_t m = 1; m <= limit; ++m) {
    for (std::size_t d = 0; d < L.dim(); ++d) cur[d] += v[d];
    cur = L.canonical(cur);
    if (cur == zero) return m;
  }
  return 0;
}

NndSpectrum<Rational> translation_orbit_spectrum(const TorusLattice& L, const TorusPoint& v,
                                                 std::size_t n) {
  check_dim(L, v, "translation_orbit_spectrum");
  if (n < 1) throw std::invalid_argument("translation_orbit_spectrum: n must be >= 1");
  TorusPoint zero(L.dim(), Rational(0));

  // D(m) = dist^2(x_0, x_m), m = 1..n
  std::vector<Rational> D(n + 1, Rational(0));
  TorusPoint cur = zero;
  std::size_t period = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    for (std::size_t d = 0; d < L.dim(); ++d) cur[d] += v[d];
    cur = L.canonical(cur);
    D[m] = torus_distance2(L, cur, zero);
    if (period == 0 && D[m] == 0) period = m;
  }

  if (period == 1) throw std::invalid_argument("translation_orbit_spectrum: v is trivial");
  if (period != 0) {
    // the orbit is the full cyclic subgroup: every point sees the same
    // distance multiset, one homogeneous class
    Rational best = D[1];
    std::size_t arg = 1;
    for (std::size_t m = 2; m < period; ++m)
      if (D[m] < best) {
        best = D[m];
        arg = m;
      }
    std::vector<Rational> per(period, best);
    std::vector<std::size_t> args(period);
    for (std::size_t i = 0; i < period; ++i) args[i] = (i + arg) % period;
    return spectrum_from_values(std::move(per), std::move(args), ClusterPolicy::exact());
  }

  // prefix minima with argmin (lowest m on ties)
  std::vector<Rational> pref(n + 1);
  std::vector<std::size_t> pref_arg(n + 1);
  pref[1] = D[1];
  pref_arg[1] = 1;
  for (std::size_t m = 2; m <= n; ++m) {
    if (D[m] < pref[m - 1]) {
      pref[m] = D[m];
      pref_arg[m] = m;
    } else {
      pref[m] = pref[m - 1];
      pref_arg[m] = pref_arg[m - 1];
    }
  }

  std::vector<Rational> per(n + 1);
  std::vector<std::size_t> args(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t reach = std::max(i, n - i);
    per[i] = pref[reach];
    const std::size_t m = pref_arg[reach];
    // the witness x_j at index distance m from x_i, preferring the lower index
    args[i] = (i >= m) ? (i - m) : (i + m);
  }
  return spectrum_from_values(std::move(per), std::move(args), ClusterPolicy::exact());
}

// ---------------------------------------------------------------------------
// many gaps construction

bool ManyGapsCertificate::holds() const {
  if (nn_is_x0.size() != k || formula_match.size() != k) return false;
  for (std::size_t j = 0; j < k; ++j)
    if (!nn_is_x0[j] || !formula_match[j]) return false;
  return distances_distinct && monotone_decreasing && points_distinct;
}

namespace {

struct PerJCheck {
  Rational dist2_at_a;    // exact dist^2(x_{a_j}, x_0)
  bool nn_ok = false;     // no m < a_j strictly closer to x_0
  bool tie = false;       // some m < a_j at exactly the same distance
};

// fixed-denominator integer engine: coordinates of x_m live on the grid
// (1/den) Z, squared distances on (1/den^2) Z.
struct Int128Engine {
  static bool eligible(const std::vector<unsigned long>& primes, const Rational& s,
                       const Integer& N) {
    if (s <= 0 || s >= 1) return false;
    if (!s.get_den().fits_ulong_p() || !s.get_num().fits_ulong_p()) return false;
    if (!N.fits_ulong_p()) return false;
    const unsigned long den = s.get_den().get_ui();
    for (unsigned long p : primes) {
      if (den > (std::uint64_t(1) << 62) / p) return false;  // P_l = p*den must fit
    }
    return true;
  }

  // visit(m, dist2_num) for m = 1..mmax; dist2 = dist2_num / den^2
  template <class Visit>
  static void scan(const std::vector<unsigned long>& primes, const std::vector<int>& delta,
                   unsigned long s_num, unsigned long s_den, std::uint64_t mmax, Visit&& visit) {
    const std::size_t k = primes.size();
    std::vector<std::uint64_t> P(k), step(k), u(k, 0);
    for (std::size_t l = 0; l < k; ++l) {
      P[l] = static_cast<std::uint64_t>(primes[l]) * s_den;
      // v_l = 1 - delta_l * s  ->  numerator den -+ s_num over den
      step[l] = delta[l] > 0 ? (s_den - s_num) : (s_den + s_num);
      step[l] %= P[l];
    }
    for (std::uint64_t m = 1; m <= mmax; ++m) {
      unsigned __int128 acc = 0;
      for (std::size_t l = 0; l < k; ++l) {
        u[l] += step[l];
        if (u[l] >= P[l]) u[l] -= P[l];
        const std::uint64_t d = std::min(u[l], P[l] - u[l]);
        acc += static_cast<unsigned __int128>(d) * d;
      }
      visit(m, acc);
    }
  }
};

}  // namespace

ManyGapsCertificate many_gaps_construction(const std::vector<unsigned long>& primes,
                                           std::optional<Rational> s_opt,
                                           bool force_generic_engine) {
  if (primes.empty()) throw std::invalid_argument("many_gaps: need k >= 1 primes");
  for (unsigned long p : primes) {
    if (p < 3 || p % 2 == 0)
      throw std::invalid_argument("many_gaps: primes must be odd (got " + std::to_string(p) + ")");
    Integer z(static_cast<unsigned long>(p));
    if (mpz_probab_prime_p(z.get_mpz_t(), 30) == 0)
      throw std::invalid_argument("many_gaps: " + std::to_string(p) + " is not prime");
  }
  {
    std::vector<unsigned long> sorted = primes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("many_gaps: primes must be distinct");
  }

  ManyGapsCertificate cert;
  cert.primes = primes;
  cert.k = primes.size();
  cert.N = 1;
  for (unsigned long p : primes) cert.N *= static_cast<unsigned long>(p);

  // pi_j = inverse of prod_{i != j} p_i mod p_j; a_j = max(pi_j, p_j - pi_j) * prod
  cert.inverses.resize(cert.k);
  cert.a.resize(cert.k);
  cert.delta.resize(cert.k);
  for (std::size_t j = 0; j < cert.k; ++j) {
    Integer pj(primes[j]);
    Integer rest = cert.N / pj;
    Integer inv;
    if (mpz_invert(inv.get_mpz_t(), rest.get_mpz_t(), pj.get_mpz_t()) == 0)
      throw std::invalid_argument("many_gaps: modular inverse does not exist");
    cert.inverses[j] = inv;  // in {1..p_j-1}
    Integer other = pj - inv;
    cert.a[j] = (inv > other ? inv : other) * rest;

    // delta_j from reducing (a_j,...,a_j) componentwise and matching +-e_j
    int delta = 0;
    bool consistent = true;
    for (std::size_t i = 0; i < cert.k; ++i) {
      Integer rem = cert.a[j] % Integer(primes[i]);
      if (i == j) {
        if (rem == 1)
          delta = +1;
        else if (rem == Integer(primes[i]) - 1)
          delta = -1;
        else
          consistent = false;
      } else if (rem != 0) {
        consistent = false;
      }
    }
    if (!consistent)
      throw std::logic_error("many_gaps: (a_j,...,a_j) did not reduce to +-e_j");
    cert.delta[j] = delta;
  }

  if (s_opt) {
    cert.s = *s_opt;
    cert.s_was_auto = false;
    if (cert.s <= 0) throw std::invalid_argument("many_gaps: s must be positive");
  } else {
    Rational s(Integer(1), Integer(2) * Integer(static_cast<unsigned long>(cert.k)) * cert.N * cert.N);
    s.canonicalize();
    cert.s = s;
    cert.s_was_auto = true;
  }

  // checkpoints: the a_j in ascending order; scan m = 1..N-1 once
  std::vector<std::size_t> order(cert.k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return cert.a[x] < cert.a[y]; });

  std::vector<PerJCheck> checks(cert.k);
  bool zero_seen = false;

  const bool fast = !force_generic_engine && Int128Engine::eligible(cert.primes, cert.s, cert.N);
  cert.engine = fast ? "int128" : "mpq";

  if (fast) {
    const unsigned long s_num = cert.s.get_num().get_ui();
    const unsigned long s_den = cert.s.get_den().get_ui();
    const std::uint64_t mmax = static_cast<std::uint64_t>(cert.N.get_ui()) - 1;
    std::vector<std::uint64_t> cp_m(cert.k);
    for (std::size_t r = 0; r < cert.k; ++r) cp_m[r] = cert.a[order[r]].get_ui();
    unsigned __int128 run_min = 0;
    bool have_min = false;
    std::size_t next_cp = 0;
    Int128Engine::scan(cert.primes, cert.delta, s_num, s_den, mmax,
                       [&](std::uint64_t m, unsigned __int128 d2) {
                         if (d2 == 0) zero_seen = true;
                         if (next_cp < cert.k && m == cp_m[next_cp]) {
                           PerJCheck& c = checks[order[next_cp]];
                           Integer num;
                           {
                             // d2 (u128) -> Integer
                             std::uint64_t hi = static_cast<std::uint64_t>(d2 >> 64);
                             std::uint64_t lo = static_cast<std::uint64_t>(d2);
                             num = Integer(hi);
                             num <<= 64;
                             num += lo;
                           }
                           Rational q(num, Integer(s_den) * Integer(s_den));
                           q.canonicalize();
                           c.dist2_at_a = q;
                           c.nn_ok = !have_min || run_min >= d2;
                           c.tie = have_min && run_min == d2;
                           ++next_cp;
                         }
                         if (!have_min || d2 < run_min) {
                           run_min = d2;
                           have_min = true;
                         }
                       });
  } else {
    // generic rational engine
    const std::size_t k = cert.k;
    std::vector<Rational> P(k), step(k), u(k, Rational(0));
    for (std::size_t l = 0; l < k; ++l) {
      P[l] = Rational(static_cast<unsigned long>(cert.primes[l]));
      step[l] = mod_interval(Rational(1) - Rational(cert.delta[l]) * cert.s, P[l]);
    }
    Rational run_min(0);
    bool have_min = false;
    std::size_t next_cp = 0;
    Integer m_end = cert.N - 1;
    for (Integer m = 1; m <= m_end; ++m) {
      Rational acc(0);
      for (std::size_t l = 0; l < k; ++l) {
        u[l] += step[l];
        if (u[l] >= P[l]) u[l] -= P[l];
        Rational other = P[l] - u[l];
        const Rational& d = u[l] < other ? u[l] : other;
        acc += d * d;
      }
      if (acc == 0) zero_seen = true;
      while (next_cp < cert.k && m == cert.a[order[next_cp]]) {
        PerJCheck& c = checks[order[next_cp]];
        c.dist2_at_a = acc;
        c.nn_ok = !have_min || run_min >= acc;
        c.tie = have_min && run_min == acc;
        ++next_cp;
      }
      if (!have_min || acc < run_min) {
        run_min = acc;
        have_min = true;
      }
    }
  }

  cert.points_distinct = !zero_seen;
  cert.dist2.resize(cert.k);
  cert.formula2.resize(cert.k);
  cert.nn_is_x0.resize(cert.k);
  cert.formula_match.resize(cert.k);
  for (std::size_t j = 0; j < cert.k; ++j) {
    cert.dist2[j] = checks[j].dist2_at_a;
    Rational as = Rational(cert.a[j]) * cert.s;
    cert.formula2[j] =
        Rational(1) - 2 * as + Rational(static_cast<unsigned long>(cert.k)) * as * as;
    cert.nn_is_x0[j] = checks[j].nn_ok;
    cert.formula_match[j] = (cert.dist2[j] == cert.formula2[j]);
    if (checks[j].tie) ++cert.tie_count;
  }

  // distinct + monotone: sorted by a_j ascending, dist^2 strictly decreasing
  cert.distances_distinct = true;
  cert.monotone_decreasing = true;
  for (std::size_t r = 0; r + 1 < cert.k; ++r) {
    const Rational& hi = cert.dist2[order[r]];
    const Rational& lo = cert.dist2[order[r + 1]];
    if (lo == hi) cert.distances_distinct = false;
    if (!(lo < hi)) cert.monotone_decreasing = false;
  }

  cert.nnd_lower_bound = cert.holds() ? cert.k : 0;

  for (std::size_t j = 0; j < cert.k; ++j) {
    if (!cert.nn_is_x0[j])
      throw CertificateFailure("many_gaps: nearest neighbor of x_{a_j} is not x_0 (j=" +
                                   std::to_string(j) + "); s too large",
                               cert, j);
    if (!cert.formula_match[j])
      throw CertificateFailure(
          "many_gaps: computed dist^2 does not match 1 - 2 a_j s + k (a_j s)^2 (j=" +
              std::to_string(j) + ")",
          cert, j);
  }
  if (!cert.distances_distinct || !cert.monotone_decreasing) {
    std::size_t j = order.size() > 1 ? order[1] : 0;
    throw CertificateFailure("many_gaps: the k distances are not distinct/decreasing; s too large",
                             cert, j);
  }
  if (!cert.points_distinct)
    throw CertificateFailure("many_gaps: orbit points are not distinct", cert, 0);

  return cert;
}

std::vector<TorusPoint> many_gaps_orbit(const ManyGapsCertificate& cert) {
  TorusLattice L = many_gaps_lattice(cert);
  TorusPoint v(cert.k), zero(cert.k, Rational(0));
  for (std::size_t l = 0; l < cert.k; ++l) v[l] = Rational(1) - Rational(cert.delta[l]) * cert.s;
  std::size_t n = cert.N.get_ui() - 1;
  return translation_orbit(L, v, zero, n);
}

TorusLattice many_gaps_lattice(const ManyGapsCertificate& cert) {
  std::vector<Rational> sides;
  sides.reserve(cert.k);
  for (unsigned long p : cert.primes) sides.emplace_back(p);
  return TorusLattice::rectangular(sides);
}

std::vector<std::vector<unsigned long>> odd_prime_tuples_up_to(unsigned long bound) {
  std::vector<unsigned long> primes;
  for (unsigned long p = 3; p <= bound; p += 2) {
    Integer z(p);
    if (mpz_probab_prime_p(z.get_mpz_t(), 30) != 0) primes.push_back(p);
  }
  std::vector<std::vector<unsigned long>> out;
  std::vector<unsigned long> cur;
  // depth-first over ascending tuples with bounded product
  auto rec = [&](auto&& self, std::size_t start, unsigned long prod) -> void {
    for (std::size_t i = start; i < primes.size(); ++i) {
      if (primes[i] > bound / prod) break;
      cur.push_back(primes[i]);
      out.push_back(cur);
      self(self, i + 1, prod * primes[i]);
      cur.pop_back();
    }
  };
  rec(rec, 0, 1);
  return out;
}

}  // namespace gapscope
