#include "gapscope/klein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gapscope {

KleinQuotient::KleinQuotient(Rational w, Rational h) : w_(std::move(w)), h_(std::move(h)) {
  if (w_ <= 0 || h_ <= 0) throw std::invalid_argument("KleinQuotient: w, h must be positive");
}

PlanePoint KleinQuotient::canonical(const PlanePoint& p, int* parity) const {
  // reduce x mod 2w; a glide (flip y) brings [w, 2w) back into [0, w)
  Rational x = mod_interval(p[0], 2 * w_);
  Rational y = p[1];
  int par = 0;
  if (x >= w_) {
    x -= w_;
    y = -y;
    par = 1;
  }
  y = mod_interval(y, h_);
  if (parity) *parity = par;
  return {x, y};
}

Rational KleinQuotient::distance2(const PlanePoint& p, const PlanePoint& q) const {
  const PlanePoint a = canonical(p);
  const PlanePoint b = canonical(q);

  // initial candidate: identity image
  Rational best = sq(b[0] - a[0]) + sq(b[1] - a[1]);

  // enumeration radius from the best candidate so far
  auto radius_bound = [&](const Rational& modulus) {
    // smallest R with (R*modulus)^2 >= best, plus margin 1
    long r = 0;
    Rational acc(0);
    while (acc * acc < best) {
      ++r;
      acc = Rational(r) * modulus;
      if (r > 1000000) throw std::logic_error("KleinQuotient: runaway enumeration");
    }
    return r + 1;
  };

  const long mr = radius_bound(w_);
  const long nr = radius_bound(h_);
  for (long m = -mr; m <= mr; ++m) {
    const Rational ix = b[0] + Rational(m) * w_;
    const Rational dx2 = sq(ix - a[0]);
    if (dx2 > best) continue;
    const Rational iy_base = (m % 2 == 0) ? b[1] : -b[1];
    for (long n = -nr; n <= nr; ++n) {
      const Rational iy = iy_base + Rational(n) * h_;
      Rational d2 = dx2 + sq(iy - a[1]);
      if (d2 < best) best = d2;
    }
  }
  return best;
}

double KleinQuotient::distance(const PlanePoint& p, const PlanePoint& q) const {
  return std::sqrt(to_double(distance2(p, q)));
}

KleinIntersectionReport klein_geodesic_intersections(const KleinQuotient& K,
                                                     const PlanePoint& start, long dir_x,
                                                     long dir_y, const Rational& length) {
  if (length <= 0) throw std::invalid_argument("klein_geodesic_intersections: length must be > 0");
  if (dir_x == 0 && dir_y == 0)
    throw std::invalid_argument("klein_geodesic_intersections: zero direction");
  const long g = std::gcd(std::labs(dir_x), std::labs(dir_y));
  long a = dir_x / g, b = dir_y / g;

  KleinIntersectionReport report;

  const Rational norm2 = Rational(a) * a + Rational(b) * b;
  // t_max = length / |d|, handled via t^2 * norm2 < length^2 for t > 0
  const Rational len2 = sq(length);
  auto within = [&](const Rational& t) {
    return t > 0 && t * t * norm2 < len2;
  };
  const double tmax_d = to_double(length) / std::sqrt(to_double(norm2));

  const Rational w = K.w(), h = K.h();

  // overlap detection: a nonidentity element mapping the line onto itself.
  // m even: same direction; line invariant iff m*w/a == n*h/b shift matches.
  // (axis-parallel special cases below.)
  if (a == 0) {
    // vertical line x = c: m-odd images are the parallel lines x = c + m w,
    // never equal to x = c, so there are no transverse crossings; the m = 0
    // images are y-shifts of the same line and the geodesic closes at
    // length h.
    report.overlap = length > h;
    return report;
  }
  if (b == 0) {
    // horizontal line: m-even images are y-shifts by n h (parallel except
    // n = 0, which closes the geodesic at length 2w); m-odd images live on
    // y = -y0 + n h with the SAME direction, so the special lines
    // 2 y0 in h*Z map onto themselves under a single glide (period w).
    const bool self_glide = mod_interval(2 * start[1], h) == 0;
    const Rational period = self_glide ? w : 2 * w;
    report.overlap = length > period;
    return report;
  }

  // m even, nonzero: closed-geodesic overlap when m w / a == n h / b exactly
  {
    // least positive tau with tau*a = m w, tau*b = n h for integers m even, n:
    // tau = lcm-style; existence requires (w/a)/(h/b) rational -- it is, all
    // rationals here. Compute the least positive period and flag overlap if
    // it fits inside the segment.
    // period in t-units: t_per = least positive t with t*a ≡ 0 (mod 2w)?? --
    // the glide square is translation by (2w, 0) and t^n by (0, h):
    // t*(a,b) in lattice spanned by (2w,0),(0,h): t*a = 2w*m', t*b = h*n.
    const Rational ta = 2 * w / Rational(a);  // t at one 2w-step in x
    const Rational tb = h / Rational(b);      // t at one h-step in y
    // least common positive multiple of ta and tb (both rational)
    const Rational ratio = ta / tb;           // rational p/q in lowest terms
    Integer p = ratio.get_num(), q = ratio.get_den();
    if (p < 0) p = -p;
    // t_per = |ta| * q = |tb| * p
    Rational t_per = ta < 0 ? -ta : ta;
    t_per *= Rational(q);
    if (within(t_per)) report.overlap = true;
  }

  // transverse crossings: m odd images, direction (a, -b)
  // t2 = t1 + m w / a ; t1 + t2 = (n h - 2 start_y) / b
  const Rational cos_alpha = (Rational(a) * a - Rational(b) * b) / norm2;
  const double alpha = std::acos(std::clamp(to_double(cos_alpha), -1.0, 1.0));
  const double norm_d = std::sqrt(to_double(norm2));

  // enumerate odd m with 0 < m w / a < t_max, i.e. matching sign(a)
  const double mw_limit = tmax_d * std::abs(to_double(Rational(a)) / to_double(w));
  const long m_abs_max = static_cast<long>(std::ceil(mw_limit)) + 1;
  for (long m_abs = 1; m_abs <= m_abs_max; m_abs += 2) {
    const long m = (a > 0) ? m_abs : -m_abs;
    const Rational gap = Rational(m) * w / Rational(a);  // t2 - t1 > 0
    if (!(gap > 0)) continue;
    if (!(gap * gap * norm2 < len2)) continue;
    // t1 = ((n h - 2 y0)/b - gap) / 2 ; need 0 < t1 and t2 = t1 + gap < tmax
    // solve n-range from t1 in (0, tmax - gap)
    const Rational y0 = start[1];
    // t1(n) = ((n h - 2 y0)/b - gap) / 2 -> monotone in n (sign of h/b)
    // just scan integer n in a window derived from double endpoints
    const double t1_lo = 0.0, t1_hi = tmax_d - to_double(gap);
    if (t1_hi <= 0) continue;
    // n = (b*(2 t1 + gap) + 2 y0)/h
    auto n_of_t1 = [&](double t1) {
      return (to_double(Rational(b)) * (2 * t1 + to_double(gap)) + 2 * to_double(y0)) /
             to_double(h);
    };
    double n_a = n_of_t1(t1_lo), n_b = n_of_t1(t1_hi);
    if (n_a > n_b) std::swap(n_a, n_b);
    const long n_lo = static_cast<long>(std::floor(n_a)) - 1;
    const long n_hi = static_cast<long>(std::ceil(n_b)) + 1;
    for (long n = n_lo; n <= n_hi; ++n) {
      const Rational t_sum = (Rational(n) * h - 2 * y0) / Rational(b);
      Rational t1 = (t_sum - gap) / 2;
      Rational t2 = t1 + gap;
      if (!within(t1) || !within(t2)) continue;
      if (!(t1 < t2)) continue;
      KleinIntersection rec;
      rec.t1 = t1;
      rec.t2 = t2;
      rec.m = m;
      rec.n = n;
      rec.location = K.canonical({start[0] + t1 * Rational(a), start[1] + t1 * Rational(b)});
      rec.cos_alpha = cos_alpha;
      rec.s_sq = t1 * t1 * norm2;
      rec.t_sq = t2 * t2 * norm2;
      rec.st = t1 * t2 * norm2;
      rec.s = to_double(t1) * norm_d;
      rec.t = to_double(t2) * norm_d;
      rec.alpha = alpha;
      report.records.push_back(std::move(rec));
    }
  }

  std::sort(report.records.begin(), report.records.end(),
            [](const KleinIntersection& x, const KleinIntersection& y) {
              if (x.t1 != y.t1) return x.t1 < y.t1;
              return x.t2 < y.t2;
            });

  // aggregate multiplicities by exact location
  for (const auto& rec : report.records) {
    auto it = std::find(report.locations.begin(), report.locations.end(), rec.location);
    if (it == report.locations.end()) {
      report.locations.push_back(rec.location);
      report.multiplicities.push_back(1);
    } else {
      ++report.multiplicities[static_cast<std::size_t>(it - report.locations.begin())];
    }
  }
  report.total = report.records.size();
  return report;
}

KleinTrajectory klein_trajectory(const KleinQuotient& K, const PlanePoint& start, long dir_x,
                                 long dir_y, double length, double step) {
  if (length <= 0 || step <= 0)
    throw std::invalid_argument("klein_trajectory: length and step must be positive");
  if (dir_x == 0 && dir_y == 0) throw std::invalid_argument("klein_trajectory: zero direction");
  const double norm = std::hypot(static_cast<double>(dir_x), static_cast<double>(dir_y));
  const double ux = dir_x / norm, uy = dir_y / norm;

  KleinTrajectory traj;
  traj.quotient = &K;
  traj.w = to_double(K.w());
  traj.h = to_double(K.h());
  const double x0 = to_double(start[0]), y0 = to_double(start[1]);
  const double w = traj.w, hh = traj.h;

  const std::size_t steps = static_cast<std::size_t>(std::ceil(length / step));
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  traj.v.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = std::min(length, i * step);
    double px = x0 + t * ux, py = y0 + t * uy;
    // canonical representative, double flavor of KleinQuotient::canonical
    px = std::fmod(px, 2 * w);
    if (px < 0) px += 2 * w;
    double vy = uy;
    if (px >= w) {
      px -= w;
      py = -py;
      vy = -vy;
    }
    py = std::fmod(py, hh);
    if (py < 0) py += hh;
    traj.t.push_back(t);
    traj.x.push_back({px, py});
    traj.v.push_back({ux, vy});
  }
  return traj;
}

}  // namespace gapscope
