// gapscope - numerical geodesics on implicit surfaces: integration with
// per-step projection, equally spaced sampling, two-stage intrinsic distance
// (chordal bound + shooting refinement), NND scans, transverse
// self-intersection counting, the second-derivative triple, Jacobi-equation
// conjugate point detection, and the isolated-point diagnostic.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "gapscope/klein.hpp"
#include "gapscope/metric.hpp"
#include "gapscope/surfaces.hpp"

namespace gapscope {

struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit-speed geodesic stored at uniform parameter steps (time = arc length);
// positions projected back to the surface and velocities re-unitized after
// every step.
struct GeodesicTrajectory {
  SurfacePtr surface;
  double h = 0;
  std::vector<double> t;
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  double max_residual_F = 0;  // post-projection |F|, should be ~1e-15
  double max_residual_V = 0;  // post-projection ||v|-1|

  double length() const { return t.empty() ? 0.0 : t.back(); }
  // cubic Hermite interpolation between stored steps
  Vec3 position(double s) const;
  Vec3 velocity(double s) const;  // unit-normalized
};

// 4th-order integration of x'' = -(v^T H v / |grad|^2) grad with per-step
// projection. Throws StepSizeError when the pre-projection residual exceeds
// 1e-6 and std::runtime_error on a singular gradient.
GeodesicTrajectory integrate_geodesic(SurfacePtr S, Vec3 x0, Vec3 v0, double length, double h);

// gamma(0), gamma(T), ..., gamma(nT); requires n*T <= trajectory length.
std::vector<Vec3> sample_geodesic(const GeodesicTrajectory& traj, double T, std::size_t n);

// ---------------------------------------------------------------------------
// intrinsic distance

struct IntrinsicDistance {
  double value = 0;
  bool refined = false;     // false = chordal answer was returned
  bool converged = true;    // false = shooting failed, chordal fallback
  int iterations = 0;
};

// Two-stage distance: chordal lower bound, then two-point shooting
// refinement (bisection/Newton on the initial direction at x). hint, when
// positive, is the expected arc length.
IntrinsicDistance intrinsic_distance(const ImplicitSurface& S, const Vec3& x, const Vec3& y,
                                     double hint = -1.0, double h = 1e-3);

// ---------------------------------------------------------------------------
// bounded-geodesic-combinatorics scans

struct SurfaceSpectrumStats {
  std::size_t refined_pairs = 0;
  std::size_t fallback_pairs = 0;  // shooting failures (chordal used, flagged)
};

// NND spectrum of {gamma(iT)} with chordal pruning and refinement of the
// candidate-minimal pairs only.
NndSpectrum<double> surface_sample_spectrum(const GeodesicTrajectory& traj, double T,
                                            std::size_t n, double tau = 1e-7,
                                            SurfaceSpectrumStats* stats = nullptr);

struct BgcScanRow {
  std::size_t config_id = 0;
  double T = 0;
  std::size_t n = 0;
  std::size_t nnd_count = 0;
  double min_class = 0, max_class = 0;
  std::size_t refined_pairs = 0;
  std::size_t warnings = 0;
};

struct BgcGeodesicConfig {
  Vec3 x0, v0;       // v0 is tangentialized and normalized internally
  double T = 0.1;
  std::vector<std::size_t> n_values;
};

std::vector<BgcScanRow> bgc_scan(SurfacePtr S, const std::vector<BgcGeodesicConfig>& configs,
                                 double h = 1e-3, double tau = 1e-7);

// ---------------------------------------------------------------------------
// self-intersections

struct IntersectionRecord {
  double s = 0, t = 0;      // arc-length parameters, s < t
  Vec3 location;            // midpoint of the two branch points
  double angle = 0;         // crossing angle in (0, pi)
  double gap = 0;           // |gamma(s) - gamma(t)| at the solve
  std::size_t location_id = 0;  // index into IntersectionReport::locations
};

struct IntersectionReport {
  std::vector<IntersectionRecord> records;   // one per branch pair
  std::vector<Vec3> locations;               // distinct intersection points
  std::vector<std::size_t> multiplicities;   // branch pairs per location
  std::size_t total = 0;                     // sum of multiplicities
  std::size_t ambiguous = 0;                 // near-tangential hits, not counted
};

// Transverse self-intersections of the trajectory: spatial-hash candidates,
// closest-approach refinement, records with |gamma(s)-gamma(t)| <= eps_match
// and min(angle, pi - angle) >= theta_min. Near-tangential approaches are
// counted in `ambiguous` only.
IntersectionReport count_self_intersections(const GeodesicTrajectory& traj, double eps_match,
                                            double theta_min = 1e-3);

// Same pipeline over a flat Klein-bottle trajectory (quotient metric, exact
// local line solves); cross-validated against the exact oracle.
IntersectionReport count_self_intersections(const KleinTrajectory& traj, double eps_match,
                                            double theta_min = 1e-3);

// ---------------------------------------------------------------------------
// derivative triple at a self-intersection

// D1 = 4 - 4 cos a, D2 = 2 s^2 + 2 t^2 - 4 s t cos a, D3 = D2 + D1 (1+s+t).
std::array<double, 3> derivative_triple_analytic(double s, double t, double alpha);

struct FdTriple {
  std::array<double, 3> fd{};        // Richardson-extrapolated estimates
  std::array<double, 3> analytic{};  // from (s, t, alpha)
  double max_rel_err = 0;
};

// Central second differences of f^2, f(x,y) = dist(gamma(s+x+sy),
// gamma(t+x+ty)), with Richardson extrapolation over the xi grid.
FdTriple derivative_triple_fd(const GeodesicTrajectory& traj, const IntersectionRecord& rec,
                              const std::vector<double>& xi_grid = {1e-2, 5e-3, 2.5e-3});

// Exact-geometry flavor on the flat Klein bottle: gamma is the line
// start + tau (a,b)/|(a,b)|, distances by quotient enumeration.
FdTriple derivative_triple_fd_klein(const KleinQuotient& K, const PlanePoint& start, long dir_x,
                                    long dir_y, const KleinIntersection& rec,
                                    const std::vector<double>& xi_grid = {1e-2, 5e-3, 2.5e-3});

// ---------------------------------------------------------------------------
// conjugate points

// Zeros of j'' + K(t) j = 0, j(0) = 0, j'(0) = 1, refined by bisection to
// 1e-8, for t in (0, max_length].
std::vector<double> conjugate_points(const std::function<double(double)>& K_along,
                                     double max_length, double h);
std::vector<double> conjugate_points(const GeodesicTrajectory& traj, double max_length);

// ---------------------------------------------------------------------------
// isolated-point diagnostic

// For each prefix size in `prefixes`, the number of points whose nearest
// neighbor within the prefix is farther than delta. Diagnostic only.
template <class D>
std::vector<std::size_t> isolated_point_counts(const MetricOracle<D>& m, const D& delta,
                                               const std::vector<std::size_t>& prefixes) {
  if (m.size() < 2) throw std::invalid_argument("isolated_point_counts: need >= 2 samples");
  std::vector<std::size_t> out;
  std::vector<D> nnd;  // nnd within the current prefix
  std::size_t built = 0;
  for (std::size_t target : prefixes) {
    if (target > m.size() || target < 2)
      throw std::invalid_argument("isolated_point_counts: bad prefix size");
    while (built < target) {
      // add point i, updating all previous minima
      const std::size_t i = built;
      nnd.push_back(D{});
      bool have = false;
      for (std::size_t j = 0; j < i; ++j) {
        D d = m(i, j);
        if (!have || d < nnd[i]) {
          nnd[i] = d;
          have = true;
        }
        if (i == 1 || d < nnd[j]) nnd[j] = d;  // i == 1 initializes point 0
      }
      ++built;
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < built; ++i)
      if (nnd[i] > delta) ++count;
    out.push_back(count);
  }
  return out;
}

}  // namespace gapscope
