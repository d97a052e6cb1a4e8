// gapscope - packing numbers P(M, r): certificate verification and greedy
// lower-bound search on the model spaces.
//
// Greedy search gives certified LOWER bounds only; upper bounds come from the
// Euclidean 3^k volume argument (nonnegative curvature) and from the exact
// interval statement in dimension 1. Degenerate convention: on S^k with
// r = pi the open ball is the sphere minus the antipode of the center, and
// greedy returns 1 in practice -- two points pairwise >= pi apart must be
// exact antipodes, a measure-zero event under float sampling (an exact
// antipode pair still verifies, on the boundary).
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gapscope/model_spaces.hpp"

namespace gapscope {

struct PackingViolation {
  enum Kind { PairTooClose, OutsideBall } kind = PairTooClose;
  std::size_t i = 0, j = 0;
  double value = 0;
};

struct PackingResult {
  std::string space;
  double radius = 0;
  Vector center;
  std::vector<Vector> points;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double min_pairwise = 0;     // over the certificate
  double max_center_dist = 0;  // < radius
  std::size_t boundary_pairs = 0;  // pairs within 1e-12 of r

  std::size_t count() const { return points.size(); }
};

// True iff all pairwise distances >= r - slack and all center distances < r.
// The first violation (if any) is reported through `violation`.
bool verify_packing(const ModelSpace& S, const Vector& center, double r,
                    const std::vector<Vector>& points, PackingViolation* violation = nullptr,
                    double slack = 1e-12);

struct GreedyParams {
  std::size_t max_samples = 20000;  // per trial
  std::size_t stall_limit = 2000;   // consecutive rejections that end a trial
};

// Randomized maximal packing with restarts; keeps the best trial (ties broken
// by lexicographically smallest flattened point list). The result always
// passes verify_packing. Optionally seeded with a configuration that is kept
// as a baseline (nested-certificate reuse).
PackingResult greedy_packing(const ModelSpace& S, const Vector& center, double r,
                             std::size_t trials, std::uint64_t seed,
                             const GreedyParams& params = {},
                             const std::vector<Vector>* initial = nullptr);

// 3^k, the assertion ceiling for every nonnegatively-curved greedy result.
unsigned long euclidean_packing_bound(unsigned k);

// P + 1, the orbit NND ceiling obtained from a packing bound.
inline std::size_t nnd_bound_from_packing(std::size_t P) {
  if (P < 1) throw std::invalid_argument("nnd_bound_from_packing: P >= 1");
  return P + 1;
}

struct HyperbolicScanResult {
  std::vector<double> radii;
  std::vector<std::size_t> counts;           // provably nondecreasing
  std::vector<PackingResult> certificates;   // one per radius
};

// Greedy lower bounds for P(H^k_kappa, r) over strictly increasing radii.
// The certificate at radius r_i is rescaled along radial geodesics (an
// expanding map for lambda >= 1) into a starting configuration at r_{i+1},
// so the reported counts are nondecreasing by construction.
HyperbolicScanResult hyperbolic_monotonicity_scan(std::size_t k, double kappa,
                                                  const std::vector<double>& radii,
                                                  std::size_t trials, std::uint64_t seed,
                                                  const GreedyParams& params = {});

// Uniform sample from the open r-ball around `center` (area/measure-correct
// per space family); exposed for tests.
Vector sample_in_ball(const ModelSpace& S, const Vector& center, double r, std::mt19937_64& rng);

}  // namespace gapscope
