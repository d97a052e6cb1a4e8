#include "gapscope/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gapscope {

namespace {

// splitmix64: derive independent per-trial seeds from one master seed
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector random_unit_tangent_sphere(const Vector& at, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(at.size());
  while (true) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    v -= v.dot(at) * at;
    const double n = v.norm();
    if (n > 1e-8) return v / n;
  }
}

Vector random_unit_tangent_hyperbolic(const HyperbolicSpace& H, const Vector& at,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(at.size());
  while (true) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    // project out the Minkowski component along `at`: <at,at>_L = 1/kappa
    const double coef = HyperbolicSpace::minkowski(v, at) * H.kappa();
    v -= coef * at;
    const double n2 = HyperbolicSpace::minkowski(v, v);
    if (n2 > 1e-16) return v / std::sqrt(n2);
  }
}

bool lexicographically_less(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < a[i].size(); ++d) {
      if (a[i][d] < b[i][d]) return true;
      if (a[i][d] > b[i][d]) return false;
    }
  }
  return a.size() < b.size();
}

}  // namespace

Vector sample_in_ball(const ModelSpace& S, const Vector& center, double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  if (dynamic_cast<const EuclideanSpace*>(&S)) {
    // rejection from the bounding box
    Vector x(center.size());
    while (true) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = center[i] + (2 * unif(rng) - 1) * r;
      if ((x - center).norm() < r) return x;
    }
  }

  if (dynamic_cast<const SphereSpace*>(&S) || dynamic_cast<const ProjectiveSpace*>(&S)) {
    const double theta_max = std::min(r, M_PI);
    const std::size_t k = S.manifold_dim();
    // phi with density sin^{k-1} on [0, theta_max): rejection against the max
    const double peak = std::sin(std::min(theta_max, M_PI / 2));
    double phi;
    while (true) {
      phi = unif(rng) * theta_max;
      const double w = std::pow(std::sin(phi) / peak, static_cast<double>(k - 1));
      if (k == 1 || unif(rng) < w) break;
    }
    if (phi >= theta_max) phi = std::nextafter(theta_max, 0.0);
    const Vector u = random_unit_tangent_sphere(center, rng);
    Vector p = std::cos(phi) * center + std::sin(phi) * u;
    return S.canonical_point(std::move(p));
  }

  if (const auto* H = dynamic_cast<const HyperbolicSpace*>(&S)) {
    const std::size_t k = S.manifold_dim();
    // radial density ~ sinh^{k-1}(rho/R): rejection against the rim value,
    // which is where hyperbolic mass concentrates
    const double rim = std::sinh(r / H->radius());
    double rho;
    while (true) {
      rho = unif(rng) * r;
      const double w = std::pow(std::sinh(rho / H->radius()) / rim, static_cast<double>(k - 1));
      if (k == 1 || unif(rng) < w) break;
    }
    const Vector u = random_unit_tangent_hyperbolic(*H, center, rng);
    return H->exp(center, u, rho);
  }

  throw std::invalid_argument("sample_in_ball: unsupported space " + S.name());
}

bool verify_packing(const ModelSpace& S, const Vector& center, double r,
                    const std::vector<Vector>& points, PackingViolation* violation, double slack) {
  if (points.empty()) return true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dc = S.distance(center, points[i]);
    if (!(dc < r)) {
      if (violation) *violation = {PackingViolation::OutsideBall, i, i, dc};
      return false;
    }
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = S.distance(points[i], points[j]);
      if (d < r - slack) {
        if (violation) *violation = {PackingViolation::PairTooClose, i, j, d};
        return false;
      }
    }
  }
  return true;
}

PackingResult greedy_packing(const ModelSpace& S, const Vector& center, double r,
                             std::size_t trials, std::uint64_t seed, const GreedyParams& params,
                             const std::vector<Vector>* initial) {
  if (!(r > 0)) throw std::invalid_argument("greedy_packing: r must be positive");
  if (trials < 1) throw std::invalid_argument("greedy_packing: trials >= 1");
  S.validate_point(center, 1e-9);

  std::vector<Vector> best;
  if (initial) best = *initial;  // baseline kept even if no trial beats it

  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(mix_seed(seed, trial));
    std::vector<Vector> accepted;
    if (initial) accepted = *initial;
    std::size_t stall = 0;
    for (std::size_t s = 0; s < params.max_samples && stall < params.stall_limit; ++s) {
      Vector cand = sample_in_ball(S, center, r, rng);
      bool ok = true;
      for (const Vector& p : accepted) {
        if (S.distance(cand, p) < r) {
          ok = false;
          break;
        }
      }
      if (ok) {
        accepted.push_back(std::move(cand));
        stall = 0;
      } else {
        ++stall;
      }
    }
    if (accepted.size() > best.size() ||
        (accepted.size() == best.size() && lexicographically_less(accepted, best)))
      best = std::move(accepted);
  }

  PackingResult res;
  res.space = S.name();
  res.radius = r;
  res.center = center;
  res.points = std::move(best);
  res.trials = trials;
  res.seed = seed;

  res.min_pairwise = std::numeric_limits<double>::infinity();
  res.max_center_dist = 0;
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    res.max_center_dist = std::max(res.max_center_dist, S.distance(center, res.points[i]));
    for (std::size_t j = i + 1; j < res.points.size(); ++j) {
      const double d = S.distance(res.points[i], res.points[j]);
      res.min_pairwise = std::min(res.min_pairwise, d);
      if (d < r + 1e-12) ++res.boundary_pairs;
    }
  }
  PackingViolation v;
  if (!verify_packing(S, center, r, res.points, &v))
    throw std::logic_error("greedy_packing: produced certificate failed verification");
  return res;
}

unsigned long euclidean_packing_bound(unsigned k) {
  if (k < 1 || k > 40) throw std::invalid_argument("euclidean_packing_bound: k in [1, 40]");
  unsigned long b = 1;
  for (unsigned i = 0; i < k; ++i) b *= 3;
  return b;
}

HyperbolicScanResult hyperbolic_monotonicity_scan(std::size_t k, double kappa,
                                                  const std::vector<double>& radii,
                                                  std::size_t trials, std::uint64_t seed,
                                                  const GreedyParams& params) {
  if (kappa >= 0)
    throw std::invalid_argument("hyperbolic_monotonicity_scan: kappa must be negative");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw std::invalid_argument("hyperbolic_monotonicity_scan: radii must be strictly increasing");

  HyperbolicSpace H(k, kappa);
  const Vector center = H.base_point();

  HyperbolicScanResult scan;
  scan.radii = radii;
  std::vector<Vector> carried;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    std::vector<Vector> rescaled;
    if (i > 0 && !carried.empty()) {
      // radial dilation by lambda = r_{i+1}/r_i about the center; sinh
      // superlinearity makes this lambda-expanding, so pairwise >= r_i maps
      // to pairwise >= r_{i+1}
      const double lambda = r / radii[i - 1];
      for (const Vector& p : carried) {
        auto [rho, u] = H.log(center, p);
        rescaled.push_back(rho == 0 ? p : H.exp(center, u, lambda * rho));
      }
      // guard against float boundary cases: drop any point breaking the
      // certificate (not expected; verify_packing has 1e-12 slack anyway)
      std::vector<Vector> safe;
      for (const Vector& p : rescaled) {
        bool ok = H.distance(center, p) < r;
        for (const Vector& q : safe)
          ok = ok && H.distance(p, q) >= r - 1e-12;
        if (ok) safe.push_back(p);
      }
      rescaled = std::move(safe);
    }
    PackingResult res = greedy_packing(H, center, r, trials, mix_seed(seed, 1000 + i), params,
                                       rescaled.empty() ? nullptr : &rescaled);
    carried = res.points;
    scan.counts.push_back(res.count());
    scan.certificates.push_back(std::move(res));
  }
  return scan;
}

}  // namespace gapscope
