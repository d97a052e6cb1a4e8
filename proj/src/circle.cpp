#include "gapscope/circle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace gapscope {

namespace {

template <class T>
void collapse_sorted(const std::vector<T>& sorted, std::vector<T>& distinct,
                     std::vector<std::size_t>& multiplicity, auto same) {
  distinct.clear();
  multiplicity.clear();
  for (const T& v : sorted) {
    if (!distinct.empty() && same(distinct.back(), v)) {
      ++multiplicity.back();
    } else {
      distinct.push_back(v);
      multiplicity.push_back(1);
    }
  }
}

std::string orbit_label(const ExactCircleOrbit& o) {
  std::ostringstream os;
  os << "p=" << rational_to_string(o.p) << " offset=" << rational_to_string(o.offset)
     << " n=" << o.n;
  return os.str();
}

}  // namespace

ExactCircleOrbit rotation_orbit(const Rational& p, std::size_t n, const Rational& offset) {
  if (n < 1) throw std::invalid_argument("rotation_orbit: n must be >= 1");
  ExactCircleOrbit o;
  o.p = mod_one(p);
  o.offset = mod_one(offset);
  o.n = n;

  // common denominator of p and offset; all residues are numerators over it
  Integer dp = o.p.get_den(), doff = o.offset.get_den();
  Integer g;
  mpz_gcd(g.get_mpz_t(), dp.get_mpz_t(), doff.get_mpz_t());
  o.den = dp / g * doff;

  Integer step = o.p.get_num() * (o.den / dp);
  Integer r = o.offset.get_num() * (o.den / doff);
  o.raw.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    o.raw.push_back(r);
    r += step;
    if (r >= o.den) r -= o.den;
  }

  std::vector<Integer> sorted = o.raw;
  std::sort(sorted.begin(), sorted.end());
  collapse_sorted(sorted, o.distinct, o.multiplicity,
                  [](const Integer& a, const Integer& b) { return a == b; });
  return o;
}

FloatCircleOrbit rotation_orbit_float(double p, std::size_t n, double offset) {
  if (n < 1) throw std::invalid_argument("rotation_orbit_float: n must be >= 1");
  FloatCircleOrbit o;
  o.p = p - std::floor(p);
  o.offset = offset - std::floor(offset);
  o.n = n;
  o.raw.reserve(n + 1);
  double r = o.offset;
  for (std::size_t i = 0; i <= n; ++i) {
    o.raw.push_back(r);
    r += o.p;
    r -= std::floor(r);
  }
  std::vector<double> sorted = o.raw;
  std::sort(sorted.begin(), sorted.end());
  collapse_sorted(sorted, o.distinct, o.multiplicity,
                  [&](double a, double b) { return b - a <= o.collapse_eps; });
  return o;
}

std::vector<Rational> circular_gap_spectrum(const ExactCircleOrbit& o) {
  const auto& x = o.distinct;
  if (x.size() < 2) throw DegenerateOrbitError("circular_gap_spectrum: fewer than 2 distinct residues");

  std::vector<Integer> gaps;
  gaps.reserve(x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) gaps.push_back(x[i + 1] - x[i]);
  gaps.push_back(o.den - x.back() + x.front());  // wraparound

  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());

  if (gaps.size() > 3)
    throw ThreeGapViolation("classical three-gap bound exceeded: " + std::to_string(gaps.size()) +
                            " gaps at " + orbit_label(o));

  std::vector<Rational> out;
  out.reserve(gaps.size());
  for (const Integer& g : gaps) {
    Rational q(g, o.den);
    q.canonicalize();
    out.push_back(q);
  }
  return out;
}

std::vector<double> circular_gap_spectrum(const FloatCircleOrbit& o, double tau) {
  const auto& x = o.distinct;
  if (x.size() < 2) throw DegenerateOrbitError("circular_gap_spectrum: fewer than 2 distinct residues");
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) gaps.push_back(x[i + 1] - x[i]);
  gaps.push_back(1.0 - x.back() + x.front());
  std::sort(gaps.begin(), gaps.end());
  auto classes = cluster_sorted_values(gaps, ClusterPolicy::rel_tol(tau));
  std::vector<double> out;
  for (const auto& c : classes) out.push_back(c.value);
  return out;
}

NndSpectrum<Rational> geometric_nnd_spectrum(const ExactCircleOrbit& o) {
  const auto& x = o.distinct;
  const std::size_t m = x.size();
  if (m < 2) throw DegenerateOrbitError("geometric_nnd_spectrum: fewer than 2 distinct residues");

  // On the circle, nnd(x) = min(gap to cyclic predecessor, gap to successor):
  // the arc distance min(cw, ccw) minimized over the set splits into the two
  // adjacent gaps. Validated against the all-pairs oracle in tests.
  std::vector<Integer> gap(m);  // gap[i] = x[(i+1) mod m] - x[i], cyclically
  for (std::size_t i = 0; i + 1 < m; ++i) gap[i] = x[i + 1] - x[i];
  gap[m - 1] = o.den - x.back() + x.front();

  std::vector<Rational> per(m);
  std::vector<std::size_t> nearest(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Integer& left = gap[(i + m - 1) % m];
    const Integer& right = gap[i];
    std::size_t left_idx = (i + m - 1) % m;
    std::size_t right_idx = (i + 1) % m;
    Integer v;
    std::size_t arg;
    if (left < right || (left == right && left_idx < right_idx)) {
      v = left;
      arg = left_idx;
    } else {
      v = right;
      arg = right_idx;
    }
    Rational q(v, o.den);
    q.canonicalize();
    per[i] = q;
    nearest[i] = arg;
  }

  auto spec = spectrum_from_values(std::move(per), std::move(nearest), ClusterPolicy::exact());
  if (spec.distinct_count() > 3)
    throw ThreeGapViolation("geometric three-gap bound exceeded: |NND|=" +
                            std::to_string(spec.distinct_count()) + " at " + orbit_label(o));
  return spec;
}

MetricOracle<Rational> circle_arc_oracle(const ExactCircleOrbit& o) {
  // capture numerators by value; the oracle outlives the orbit in some tests
  auto nums = o.distinct;
  Integer den = o.den;
  return MetricOracle<Rational>(
      nums.size(),
      [nums, den](std::size_t i, std::size_t j) {
        Integer d = nums[i] - nums[j];
        mpz_abs(d.get_mpz_t(), d.get_mpz_t());
        Integer other = den - d;
        Rational q(d < other ? d : other, den);
        q.canonicalize();
        return q;
      },
      /*exact=*/true);
}

namespace {

NndSpectrum<double> float_circle_spectrum(const std::vector<double>& x, CircleMetric metric,
                                          double tau) {
  const std::size_t m = x.size();
  std::vector<double> per(m);
  std::vector<std::size_t> nearest(m);
  for (std::size_t i = 0; i < m; ++i) {
    double left = (i == 0) ? (x.front() + 1.0 - x.back()) : (x[i] - x[i - 1]);
    double right = (i + 1 == m) ? (x.front() + 1.0 - x.back()) : (x[i + 1] - x[i]);
    std::size_t left_idx = (i + m - 1) % m;
    std::size_t right_idx = (i + 1) % m;
    double v;
    std::size_t arg;
    if (left < right || (left == right && left_idx < right_idx)) {
      v = left;
      arg = left_idx;
    } else {
      v = right;
      arg = right_idx;
    }
    if (metric == CircleMetric::Chord) v = 2.0 * std::sin(M_PI * v);
    per[i] = v;
    nearest[i] = arg;
  }
  return spectrum_from_values(std::move(per), std::move(nearest), ClusterPolicy::rel_tol(tau));
}

}  // namespace

NndSpectrum<double> geometric_nnd_spectrum(const FloatCircleOrbit& o, CircleMetric metric,
                                           double tau) {
  if (o.distinct.size() < 2)
    throw DegenerateOrbitError("geometric_nnd_spectrum: fewer than 2 distinct residues");
  return float_circle_spectrum(o.distinct, metric, tau);
}

NndSpectrum<double> geometric_nnd_spectrum_chord(const ExactCircleOrbit& o, double tau) {
  if (o.distinct.size() < 2)
    throw DegenerateOrbitError("geometric_nnd_spectrum_chord: fewer than 2 distinct residues");
  std::vector<double> x;
  x.reserve(o.distinct.size());
  for (const Integer& num : o.distinct) x.push_back(Rational(num, o.den).get_d());
  return float_circle_spectrum(x, CircleMetric::Chord, tau);
}

}  // namespace gapscope
