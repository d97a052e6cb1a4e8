#include "gapscope/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace gapscope {

namespace {

Vec3 geodesic_accel(const ImplicitSurface& S, const Vec3& x, const Vec3& v) {
  const Vec3 g = S.gradient(x);
  const double g2 = g.squaredNorm();
  if (g2 < 1e-20) throw std::runtime_error("integrate_geodesic: singular surface gradient");
  const double lambda = v.dot(S.hessian(x) * v) / g2;
  return -lambda * g;
}

struct State {
  Vec3 x, v;
};

State rk4_step(const ImplicitSurface& S, const State& s, double dt) {
  const Vec3 k1x = s.v;
  const Vec3 k1v = geodesic_accel(S, s.x, s.v);
  const Vec3 k2x = s.v + 0.5 * dt * k1v;
  const Vec3 k2v = geodesic_accel(S, s.x + 0.5 * dt * k1x, s.v + 0.5 * dt * k1v);
  const Vec3 k3x = s.v + 0.5 * dt * k2v;
  const Vec3 k3v = geodesic_accel(S, s.x + 0.5 * dt * k2x, s.v + 0.5 * dt * k2v);
  const Vec3 k4x = s.v + dt * k3v;
  const Vec3 k4v = geodesic_accel(S, s.x + dt * k3x, s.v + dt * k3v);
  State out;
  out.x = s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.v = s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

// Hermite basis on [0,1]
inline void hermite_weights(double u, double& h00, double& h10, double& h01, double& h11) {
  const double u2 = u * u, u3 = u2 * u;
  h00 = 2 * u3 - 3 * u2 + 1;
  h10 = u3 - 2 * u2 + u;
  h01 = -2 * u3 + 3 * u2;
  h11 = u3 - u2;
}

}  // namespace

Vec3 GeodesicTrajectory::position(double s) const {
  if (t.size() < 2) throw std::runtime_error("trajectory too short");
  const double L = t.back();
  s = std::clamp(s, 0.0, L);
  std::size_t i = std::min(static_cast<std::size_t>(s / h), t.size() - 2);
  while (i + 2 < t.size() && s > t[i + 1]) ++i;
  while (i > 0 && s < t[i]) --i;
  const double dt = t[i + 1] - t[i];
  const double u = (s - t[i]) / dt;
  double h00, h10, h01, h11;
  hermite_weights(u, h00, h10, h01, h11);
  return h00 * x[i] + h10 * dt * v[i] + h01 * x[i + 1] + h11 * dt * v[i + 1];
}

Vec3 GeodesicTrajectory::velocity(double s) const {
  if (t.size() < 2) throw std::runtime_error("trajectory too short");
  const double L = t.back();
  s = std::clamp(s, 0.0, L);
  std::size_t i = std::min(static_cast<std::size_t>(s / h), t.size() - 2);
  while (i + 2 < t.size() && s > t[i + 1]) ++i;
  while (i > 0 && s < t[i]) --i;
  const double dt = t[i + 1] - t[i];
  const double u = (s - t[i]) / dt;
  const double d00 = 6 * u * u - 6 * u;
  const double d10 = 3 * u * u - 4 * u + 1;
  const double d01 = -d00;
  const double d11 = 3 * u * u - 2 * u;
  Vec3 vel = (d00 * x[i] + d01 * x[i + 1]) / dt + d10 * v[i] + d11 * v[i + 1];
  const double n = vel.norm();
  return n > 0 ? Vec3(vel / n) : v[i];
}

GeodesicTrajectory integrate_geodesic(SurfacePtr S, Vec3 x0, Vec3 v0, double length, double h) {
  if (!(length > 0) || !(h > 0))
    throw std::invalid_argument("integrate_geodesic: length and h must be positive");
  x0 = S->project(x0);
  v0 = S->tangential(x0, v0);
  const double vn = v0.norm();
  if (vn < 1e-12) throw std::invalid_argument("integrate_geodesic: degenerate initial velocity");
  v0 /= vn;

  GeodesicTrajectory traj;
  traj.surface = S;
  traj.h = h;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(length / h - 1e-12));
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  traj.v.reserve(steps + 1);

  State cur{x0, v0};
  traj.t.push_back(0.0);
  traj.x.push_back(cur.x);
  traj.v.push_back(cur.v);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t0 = i * h;
    const double t1 = std::min(length, t0 + h);
    State nxt = rk4_step(*S, cur, t1 - t0);
    const double pre_res = std::abs(S->F(nxt.x));
    if (pre_res > 1e-6)
      throw StepSizeError("integrate_geodesic: pre-projection residual " +
                          std::to_string(pre_res) + " at t=" + std::to_string(t1) +
                          "; reduce the step size");
    nxt.x = S->project(nxt.x);
    nxt.v = S->tangential(nxt.x, nxt.v);
    nxt.v.normalize();
    traj.max_residual_F = std::max(traj.max_residual_F, std::abs(S->F(nxt.x)));
    traj.max_residual_V = std::max(traj.max_residual_V, std::abs(nxt.v.norm() - 1.0));
    traj.t.push_back(t1);
    traj.x.push_back(nxt.x);
    traj.v.push_back(nxt.v);
    cur = nxt;
  }
  return traj;
}

std::vector<Vec3> sample_geodesic(const GeodesicTrajectory& traj, double T, std::size_t n) {
  if (!(T > 0)) throw std::invalid_argument("sample_geodesic: T must be positive");
  if (static_cast<double>(n) * T > traj.length() * (1 + 1e-12))
    throw std::invalid_argument("sample_geodesic: trajectory shorter than n*T");
  std::vector<Vec3> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(traj.position(i * T));
  return out;
}

// ---------------------------------------------------------------------------
// intrinsic distance via shooting

namespace {

struct ShotResult {
  double miss = 0;       // signed lateral offset at closest approach
  double arc = 0;        // arc length at closest approach
  double closest = 0;    // |gamma - y| at closest approach
  bool reached = false;  // closest approach not at the far end of the shot
};

// Integrate from (x, u) and track the closest approach to y.
ShotResult shoot(const ImplicitSurface& S, const Vec3& x, const Vec3& u, const Vec3& y,
                 double arc_max, double hs) {
  State cur{x, u};
  double best_d2 = (x - y).squaredNorm();
  double best_t = 0;
  State best = cur;
  double t = 0;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(arc_max / hs));
  State prev = cur;
  double prev_t = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double dt = std::min(hs, arc_max - t);
    prev = cur;
    prev_t = t;
    cur = rk4_step(S, cur, dt);
    cur.x = S.project(cur.x);
    cur.v = S.tangential(cur.x, cur.v);
    cur.v.normalize();
    t += dt;
    const double d2 = (cur.x - y).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_t = t;
      best = cur;
    }
    if (d2 > best_d2 && best_t < t - 2 * hs && best_t > 0) break;  // past the minimum
  }
  (void)prev;
  (void)prev_t;

  // refine the closest-approach parameter: phi(t) = <gamma'(t), gamma(t)-y>
  // is zero there; a couple of Newton steps on the integrated state
  State st = best;
  double tb = best_t;
  for (int it = 0; it < 4; ++it) {
    const Vec3 diff = st.x - y;
    const double phi = st.v.dot(diff);
    const Vec3 acc = geodesic_accel(S, st.x, st.v);
    const double dphi = 1.0 + acc.dot(diff);  // |v|=1
    if (std::abs(dphi) < 1e-12) break;
    const double delta = -phi / dphi;
    if (std::abs(delta) > 4 * hs) break;
    st = rk4_step(S, st, delta);
    st.x = S.project(st.x);
    st.v = S.tangential(st.x, st.v);
    st.v.normalize();
    tb += delta;
  }

  ShotResult r;
  r.arc = tb;
  r.closest = (st.x - y).norm();
  // signed lateral offset: project y - gamma onto (normal x tangent)
  const Vec3 n = S.gradient(st.x).normalized();
  const Vec3 lateral = n.cross(st.v);
  r.miss = lateral.dot(y - st.x);
  r.reached = tb < arc_max - hs;
  return r;
}

}  // namespace

IntrinsicDistance intrinsic_distance(const ImplicitSurface& S, const Vec3& x_in, const Vec3& y_in,
                                     double hint, double h) {
  const Vec3 x = S.project(x_in);
  const Vec3 y = S.project(y_in);
  IntrinsicDistance out;
  const double chord = (x - y).norm();
  out.value = chord;
  if (chord < 1e-13) {
    out.refined = true;
    return out;
  }

  // curvature-corrected arc estimate
  const double kb = S.curvature_bound();
  const double est = hint > 0 ? hint : chord * (1.0 + chord * chord * kb * kb / 24.0);
  const double arc_max = std::max(est * 1.5, chord * 1.05);
  const double hs = std::clamp(std::min(h, est / 120.0), 1e-6, 1e-3);

  // tangent frame at x
  Vec3 e1 = S.tangential(x, y - x);
  if (e1.norm() < 1e-12 * chord) {
    out.converged = false;  // y sits on the normal line; chordal fallback
    return out;
  }
  e1.normalize();
  const Vec3 n = S.gradient(x).normalized();
  const Vec3 e2 = n.cross(e1);

  auto miss_at = [&](double theta) {
    const Vec3 u = std::cos(theta) * e1 + std::sin(theta) * e2;
    return shoot(S, x, u, y, arc_max, hs);
  };

  // secant iteration on the signed miss
  double th0 = 0.0;
  ShotResult r0 = miss_at(th0);
  double th1 = th0 + r0.miss / std::max(chord, 1e-12);  // small-angle estimate
  if (th1 == th0) th1 = th0 + 1e-7;
  ShotResult r1 = miss_at(th1);
  const double tol = std::max(1e-12, 1e-9 * chord);
  int it = 0;
  while (std::abs(r1.miss) > tol && it < 100) {
    const double denom = r1.miss - r0.miss;
    if (denom == 0) break;
    double th2 = th1 - r1.miss * (th1 - th0) / denom;
    if (!std::isfinite(th2) || std::abs(th2 - th1) > 1.0) break;
    th0 = th1;
    r0 = r1;
    th1 = th2;
    r1 = miss_at(th1);
    ++it;
  }
  out.iterations = it + 2;

  if (std::abs(r1.miss) <= tol && r1.closest <= 2 * std::abs(r1.miss) + 1e-9 && r1.arc > 0) {
    double refined = r1.arc;
    // never report below the chordal lower bound (minus rounding)
    if (refined < chord - 1e-9) refined = chord;
    out.value = refined;
    out.refined = true;
    return out;
  }
  out.converged = false;  // chordal fallback, flagged
  return out;
}

// ---------------------------------------------------------------------------
// sample spectra with chordal pruning

NndSpectrum<double> surface_sample_spectrum(const GeodesicTrajectory& traj, double T,
                                            std::size_t n, double tau,
                                            SurfaceSpectrumStats* stats) {
  const std::vector<Vec3> pts = sample_geodesic(traj, T, n);
  const std::size_t m = pts.size();
  if (m < 2) throw std::invalid_argument("surface_sample_spectrum: need >= 2 samples");
  const ImplicitSurface& S = *traj.surface;
  const double kb = S.curvature_bound();

  // chordal minima
  std::vector<double> chord_min(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (pts[i] - pts[j]).norm();
      chord_min[i] = std::min(chord_min[i], d);
      chord_min[j] = std::min(chord_min[j], d);
    }

  // candidate pairs: chord within the curvature-corrected margin of the min
  std::map<std::pair<std::size_t, std::size_t>, double> refined;
  auto margin = [&](double c) { return c * (1.0 + (c * kb) * (c * kb) / 8.0 + 1e-9); };
  std::vector<std::vector<std::pair<double, std::size_t>>> cands(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lim = margin(chord_min[i]);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = (pts[i] - pts[j]).norm();
      if (d <= lim) cands[i].push_back({d, j});
    }
    std::sort(cands[i].begin(), cands[i].end());
    if (cands[i].size() > 8) cands[i].resize(8);
  }

  std::vector<double> per(m);
  std::vector<std::size_t> arg(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = (i + 1) % m;
    for (auto [c, j] : cands[i]) {
      auto key = std::minmax(i, j);
      auto it = refined.find({key.first, key.second});
      double val;
      if (it != refined.end()) {
        val = it->second;
      } else {
        IntrinsicDistance d = intrinsic_distance(S, pts[i], pts[j], c, traj.h);
        val = d.value;
        if (stats) {
          ++stats->refined_pairs;
          if (!d.converged) ++stats->fallback_pairs;
        }
        refined[{key.first, key.second}] = val;
      }
      if (val < best || (val == best && j < best_j)) {
        best = val;
        best_j = j;
      }
    }
    per[i] = best;
    arg[i] = best_j;
  }
  return spectrum_from_values(std::move(per), std::move(arg), ClusterPolicy::rel_tol(tau));
}

std::vector<BgcScanRow> bgc_scan(SurfacePtr S, const std::vector<BgcGeodesicConfig>& configs,
                                 double h, double tau) {
  std::vector<BgcScanRow> rows;
  std::size_t id = 0;
  for (const auto& cfg : configs) {
    std::size_t n_max = 0;
    for (std::size_t n : cfg.n_values) n_max = std::max(n_max, n);
    const double length = cfg.T * static_cast<double>(n_max) + h;
    GeodesicTrajectory traj = integrate_geodesic(S, cfg.x0, cfg.v0, length, h);
    for (std::size_t n : cfg.n_values) {
      SurfaceSpectrumStats stats;
      NndSpectrum<double> spec = surface_sample_spectrum(traj, cfg.T, n, tau, &stats);
      BgcScanRow row;
      row.config_id = id;
      row.T = cfg.T;
      row.n = n;
      row.nnd_count = spec.distinct_count();
      row.min_class = spec.classes.front().value;
      row.max_class = spec.classes.back().value;
      row.refined_pairs = stats.refined_pairs;
      row.warnings = stats.fallback_pairs;
      rows.push_back(row);
    }
    ++id;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// self-intersections

namespace {

struct GridHash {
  double cell;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;

  static std::uint64_t key(long ix, long iy, long iz) {
    std::uint64_t h = 1469598103934665603ULL;
    for (long c : {ix, iy, iz}) {
      h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return h;
  }

  void insert(const Vec3& p, std::size_t idx) {
    cells[key(std::lround(std::floor(p[0] / cell)), std::lround(std::floor(p[1] / cell)),
              std::lround(std::floor(p[2] / cell)))]
        .push_back(idx);
  }

  template <class Fn>
  void probe(const Vec3& p, Fn&& fn) const {
    const long cx = std::lround(std::floor(p[0] / cell));
    const long cy = std::lround(std::floor(p[1] / cell));
    const long cz = std::lround(std::floor(p[2] / cell));
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = cells.find(key(cx + dx, cy + dy, cz + dz));
          if (it == cells.end()) continue;
          for (std::size_t idx : it->second) fn(idx);
        }
  }
};

struct RawHit {
  double s, t, gap, angle;
  Vec3 location;
  bool transverse;
};

void dedupe_and_aggregate(std::vector<RawHit>& hits, double merge_window, double eps_loc,
                          IntersectionReport& report) {
  std::sort(hits.begin(), hits.end(), [](const RawHit& a, const RawHit& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.t < b.t;
  });
  std::vector<RawHit> unique;
  for (const RawHit& hit : hits) {
    bool merged = false;
    for (RawHit& u : unique) {
      if (std::abs(u.s - hit.s) < merge_window && std::abs(u.t - hit.t) < merge_window) {
        if (hit.gap < u.gap) u = hit;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(hit);
  }

  for (const RawHit& u : unique) {
    if (!u.transverse) {
      ++report.ambiguous;
      continue;
    }
    IntersectionRecord rec;
    rec.s = u.s;
    rec.t = u.t;
    rec.location = u.location;
    rec.angle = u.angle;
    rec.gap = u.gap;
    std::size_t loc_id = report.locations.size();
    for (std::size_t L = 0; L < report.locations.size(); ++L) {
      if ((report.locations[L] - u.location).norm() <= eps_loc) {
        loc_id = L;
        break;
      }
    }
    if (loc_id == report.locations.size()) {
      report.locations.push_back(u.location);
      report.multiplicities.push_back(0);
    }
    rec.location_id = loc_id;
    ++report.multiplicities[loc_id];
    report.records.push_back(rec);
  }
  report.total = report.records.size();
}

}  // namespace

IntersectionReport count_self_intersections(const GeodesicTrajectory& traj, double eps_match,
                                            double theta_min) {
  const std::size_t m = traj.x.size();
  IntersectionReport report;
  if (m < 3) return report;
  const double h = traj.h;
  const double r_detect = 2.0 * h + eps_match;
  const double min_loop = std::max(20.0 * h, 0.5 / traj.surface->curvature_bound());

  GridHash grid{std::max(r_detect, 1e-9), {}};
  for (std::size_t i = 0; i < m; ++i) grid.insert(traj.x[i], i);

  std::vector<RawHit> hits;
  for (std::size_t i = 0; i < m; ++i) {
    grid.probe(traj.x[i], [&](std::size_t j) {
      if (j <= i) return;
      if (traj.t[j] - traj.t[i] < min_loop) return;
      if ((traj.x[i] - traj.x[j]).norm() > r_detect) return;

      // Gauss-Newton closest approach on the two branches
      double si = traj.t[i], tj = traj.t[j];
      bool ok = false;
      for (int it = 0; it < 25; ++it) {
        const Vec3 pi = traj.position(si), pj = traj.position(tj);
        const Vec3 vi = traj.velocity(si), vj = traj.velocity(tj);
        const Vec3 r = pi - pj;
        // solve [vi -vj]^T [vi -vj] d = -[vi -vj]^T r
        const double a = 1.0, b = -vi.dot(vj), c = 1.0;
        const double g1 = vi.dot(r), g2 = -vj.dot(r);
        const double det = a * c - b * b;
        if (std::abs(det) < 1e-9) break;  // near-parallel branches
        const double d1 = (-c * g1 + b * g2) / det;
        const double d2 = (b * g1 - a * g2) / det;
        si += d1;
        tj += d2;
        if (std::abs(d1) + std::abs(d2) < 1e-12) {
          ok = true;
          break;
        }
        if (std::abs(si - traj.t[i]) > 4 * h || std::abs(tj - traj.t[j]) > 4 * h) break;
        if (it >= 24) ok = true;
      }
      if (!ok) {
        // parallel-branch candidates end up here; they are either distinct
        // strands (gap > eps) or tangential contacts
        const double gap0 = (traj.x[i] - traj.x[j]).norm();
        if (gap0 <= eps_match) {
          RawHit hit{traj.t[i], traj.t[j], gap0, 0.0, traj.x[i], false};
          hits.push_back(hit);
        }
        return;
      }
      si = std::clamp(si, 0.0, traj.length());
      tj = std::clamp(tj, 0.0, traj.length());
      if (tj - si < min_loop) return;
      const Vec3 pi = traj.position(si), pj = traj.position(tj);
      const double gap = (pi - pj).norm();
      if (gap > eps_match) return;
      const Vec3 vi = traj.velocity(si), vj = traj.velocity(tj);
      const double angle = std::acos(std::clamp(vi.dot(vj), -1.0, 1.0));
      const bool transverse = std::min(angle, M_PI - angle) >= theta_min;
      hits.push_back(RawHit{si, tj, gap, angle, 0.5 * (pi + pj), transverse});
    });
  }

  dedupe_and_aggregate(hits, std::max(4 * h, 2 * eps_match), std::max(2 * eps_match, 4 * h),
                       report);
  return report;
}

IntersectionReport count_self_intersections(const KleinTrajectory& traj, double eps_match,
                                            double theta_min) {
  IntersectionReport report;
  const std::size_t m = traj.x.size();
  if (m < 3) return report;
  const double step = m > 1 ? traj.t[1] - traj.t[0] : 0.0;
  const double r_detect = 2.0 * step + eps_match;
  const double min_loop = std::max(20.0 * step, 0.25 * std::min(traj.w, traj.h));
  const double w = traj.w, hh = traj.h;

  GridHash grid{std::max(r_detect, 1e-9), {}};
  auto lift3 = [](const std::array<double, 2>& p) { return Vec3(p[0], p[1], 0.0); };
  for (std::size_t i = 0; i < m; ++i) grid.insert(lift3(traj.x[i]), i);

  // group images of a chart point within reach of the domain: (m, n) small
  auto images = [&](const std::array<double, 2>& p, const std::array<double, 2>& vel) {
    std::vector<std::pair<Vec3, Vec3>> out;
    for (int gm = -1; gm <= 1; ++gm) {
      for (int gn = -1; gn <= 1; ++gn) {
        const double ix = p[0] + gm * w;
        const double iy = (gm % 2 == 0 ? p[1] : -p[1]) + gn * hh;
        const double ivy = (gm % 2 == 0 ? vel[1] : -vel[1]);
        out.push_back({Vec3(ix, iy, 0.0), Vec3(vel[0], ivy, 0.0)});
      }
    }
    return out;
  };

  std::vector<RawHit> hits;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 pi = lift3(traj.x[i]);
    const Vec3 vi(traj.v[i][0], traj.v[i][1], 0.0);
    // probing every image of point i against the plain hash covers pairs that
    // are close only across the gluing
    for (const auto& [ip, iv] : images(traj.x[i], traj.v[i])) {
      (void)iv;
      grid.probe(ip, [&](std::size_t j) {
        if (j <= i) return;
        if (traj.t[j] - traj.t[i] < min_loop) return;
        // find the image of sample j closest to sample i in the chart
        double best = std::numeric_limits<double>::infinity();
        Vec3 pj, vj;
        for (const auto& [cp, cv] : images(traj.x[j], traj.v[j])) {
          const double d = (cp - pi).norm();
          if (d < best) {
            best = d;
            pj = cp;
            vj = cv;
          }
        }
        if (best > r_detect) return;
        // branches are straight chart lines: exact 2x2 solve
        const double cross = vi[0] * vj[1] - vi[1] * vj[0];
        if (std::abs(cross) < 1e-12) {
          if (best <= eps_match)
            hits.push_back(RawHit{traj.t[i], traj.t[j], best, 0.0, pi, false});
          return;
        }
        const Vec3 d = pj - pi;
        const double sig_i = (d[0] * vj[1] - d[1] * vj[0]) / cross;
        const double sig_j = (d[0] * vi[1] - d[1] * vi[0]) / cross;
        if (std::abs(sig_i) > 3 * r_detect || std::abs(sig_j) > 3 * r_detect) return;
        const double s = traj.t[i] + sig_i;
        const double t = traj.t[j] + sig_j;
        if (s <= 0 || t <= 0) return;
        const double L = traj.t.back();
        if (s >= L || t >= L) return;
        if (t - s < min_loop) return;
        const double angle = std::acos(std::clamp(vi.dot(vj), -1.0, 1.0));
        const bool transverse = std::min(angle, M_PI - angle) >= theta_min;
        Vec3 loc = pi + sig_i * vi;
        // canonicalize the chart location
        double lx = std::fmod(loc[0], 2 * w);
        if (lx < 0) lx += 2 * w;
        double ly = loc[1];
        if (lx >= w) {
          lx -= w;
          ly = -ly;
        }
        ly = std::fmod(ly, hh);
        if (ly < 0) ly += hh;
        hits.push_back(RawHit{s, t, 0.0, angle, Vec3(lx, ly, 0.0), transverse});
      });
    }
  }

  dedupe_and_aggregate(hits, std::max(4 * step, 2 * eps_match), std::max(2 * eps_match, 4 * step),
                       report);
  return report;
}

// ---------------------------------------------------------------------------
// derivative triples

std::array<double, 3> derivative_triple_analytic(double s, double t, double alpha) {
  if (!(s > 0) || !(t > 0)) throw std::invalid_argument("derivative_triple: s, t > 0");
  if (!(alpha > 0) || alpha > M_PI + 1e-12)
    throw std::invalid_argument("derivative_triple: alpha in (0, pi]");
  const double c = std::cos(alpha);
  const double d1 = 4.0 - 4.0 * c;
  const double d2 = 2 * s * s + 2 * t * t - 4 * s * t * c;
  const double d3 = d2 + d1 * (1.0 + s + t);
  return {d1, d2, d3};
}

namespace {

// Richardson-extrapolated central second difference of f2 along `dir`.
double fd_second(const std::function<double(double, double)>& f2,
                 const std::array<double, 2>& dir, const std::vector<double>& xi_grid) {
  const double center = f2(0.0, 0.0);
  std::vector<double> d;
  for (double xi : xi_grid) {
    const double plus = f2(xi * dir[0], xi * dir[1]);
    const double minus = f2(-xi * dir[0], -xi * dir[1]);
    d.push_back((plus - 2 * center + minus) / (xi * xi));
  }
  // one or two Richardson levels depending on grid size (ratio-2 grids)
  std::vector<double> cur = d;
  int level = 1;
  while (cur.size() > 1) {
    std::vector<double> nxt;
    const double factor = std::pow(4.0, level);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i)
      nxt.push_back((factor * cur[i + 1] - cur[i]) / (factor - 1.0));
    cur = std::move(nxt);
    ++level;
  }
  return cur.front();
}

FdTriple fd_triple_from(const std::function<double(double, double)>& f2, double s, double t,
                        double alpha, const std::vector<double>& xi_grid) {
  FdTriple out;
  out.analytic = derivative_triple_analytic(s, t, alpha);
  out.fd[0] = fd_second(f2, {1.0, 0.0}, xi_grid);
  out.fd[1] = fd_second(f2, {0.0, 1.0}, xi_grid);
  out.fd[2] = fd_second(f2, {1.0, 1.0}, xi_grid);
  for (int i = 0; i < 3; ++i) {
    const double denom = std::max(1.0, std::abs(out.analytic[i]));
    out.max_rel_err = std::max(out.max_rel_err, std::abs(out.fd[i] - out.analytic[i]) / denom);
  }
  return out;
}

}  // namespace

FdTriple derivative_triple_fd(const GeodesicTrajectory& traj, const IntersectionRecord& rec,
                              const std::vector<double>& xi_grid) {
  if (!(rec.gap <= 1e-3))
    throw std::invalid_argument("derivative_triple_fd: record is not a certified intersection");
  const double s = rec.s, t = rec.t;
  const ImplicitSurface& S = *traj.surface;
  auto f2 = [&](double x, double y) {
    const Vec3 p = traj.position(s + x + s * y);
    const Vec3 q = traj.position(t + x + t * y);
    IntrinsicDistance d = intrinsic_distance(S, p, q, -1.0, traj.h);
    return d.value * d.value;
  };
  return fd_triple_from(f2, s, t, rec.angle, xi_grid);
}

FdTriple derivative_triple_fd_klein(const KleinQuotient& K, const PlanePoint& start, long dir_x,
                                    long dir_y, const KleinIntersection& rec,
                                    const std::vector<double>& xi_grid) {
  const double norm = std::hypot(static_cast<double>(dir_x), static_cast<double>(dir_y));
  const double ux = dir_x / norm, uy = dir_y / norm;
  const double x0 = to_double(start[0]), y0 = to_double(start[1]);
  const double w = to_double(K.w()), h = to_double(K.h());
  const double s = rec.s, t = rec.t;

  // quotient distance on doubles: canonicalize into the fundamental domain,
  // then enumerate group images over a small radius
  auto canon = [&](double& px, double& py) {
    px = std::fmod(px, 2 * w);
    if (px < 0) px += 2 * w;
    if (px >= w) {
      px -= w;
      py = -py;
    }
    py = std::fmod(py, h);
    if (py < 0) py += h;
  };
  auto qdist2 = [&](double ax, double ay, double bx, double by) {
    canon(ax, ay);
    canon(bx, by);
    double best = std::numeric_limits<double>::infinity();
    for (int gm = -3; gm <= 3; ++gm)
      for (int gn = -3; gn <= 3; ++gn) {
        const double ix = bx + gm * w;
        const double iy = (gm % 2 == 0 ? by : -by) + gn * h;
        const double d2 = (ix - ax) * (ix - ax) + (iy - ay) * (iy - ay);
        best = std::min(best, d2);
      }
    return best;
  };
  auto f2 = [&](double x, double y) {
    const double ps = s + x + s * y, pt = t + x + t * y;
    return qdist2(x0 + ps * ux, y0 + ps * uy, x0 + pt * ux, y0 + pt * uy);
  };
  return fd_triple_from(f2, s, t, rec.alpha, xi_grid);
}

// ---------------------------------------------------------------------------
// conjugate points

std::vector<double> conjugate_points(const std::function<double(double)>& K_along,
                                     double max_length, double h) {
  if (!(max_length > 0) || !(h > 0))
    throw std::invalid_argument("conjugate_points: positive max_length and h required");
  // RK4 on (j, j'), j'' = -K j
  double t = 0, j = 0, jp = 1;
  std::vector<double> zeros;
  auto f = [&](double tt, double jj, double jjp, double& dj, double& djp) {
    dj = jjp;
    djp = -K_along(tt) * jj;
  };
  while (t < max_length - 1e-15) {
    const double dt = std::min(h, max_length - t);
    double k1j, k1p, k2j, k2p, k3j, k3p, k4j, k4p;
    f(t, j, jp, k1j, k1p);
    f(t + dt / 2, j + dt / 2 * k1j, jp + dt / 2 * k1p, k2j, k2p);
    f(t + dt / 2, j + dt / 2 * k2j, jp + dt / 2 * k2p, k3j, k3p);
    f(t + dt, j + dt * k3j, jp + dt * k3p, k4j, k4p);
    const double jn = j + dt / 6 * (k1j + 2 * k2j + 2 * k3j + k4j);
    const double jpn = jp + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    const double tn = t + dt;

    if (t > 0 && ((j > 0 && jn <= 0) || (j < 0 && jn >= 0))) {
      // bisection on the cubic Hermite interpolant of (j, j')
      double lo = 0, hi = 1;
      auto interp = [&](double u) {
        double h00, h10, h01, h11;
        hermite_weights(u, h00, h10, h01, h11);
        return h00 * j + h10 * dt * jp + h01 * jn + h11 * dt * jpn;
      };
      const double jlo_sign = j > 0 ? 1.0 : -1.0;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (interp(mid) * jlo_sign > 0)
          lo = mid;
        else
          hi = mid;
        if ((hi - lo) * dt < 1e-9) break;
      }
      zeros.push_back(t + 0.5 * (lo + hi) * dt);
    }
    t = tn;
    j = jn;
    jp = jpn;
  }
  return zeros;
}

std::vector<double> conjugate_points(const GeodesicTrajectory& traj, double max_length) {
  const double L = std::min(max_length, traj.length());
  const ImplicitSurface& S = *traj.surface;
  return conjugate_points([&](double t) { return S.gauss_curvature(traj.position(t)); }, L,
                          traj.h);
}

}  // namespace gapscope
