#include "gapscope/model_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gapscope {

namespace {

double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// spheres

SphereSpace::SphereSpace(std::size_t k) : k_(k) { require(k >= 1, "SphereSpace: k >= 1"); }

std::string SphereSpace::name() const { return "s" + std::to_string(k_); }

double SphereSpace::distance(const Vector& x, const Vector& y) const {
  return clamped_acos(x.dot(y));
}

void SphereSpace::validate_point(const Vector& p, double tol) const {
  require(static_cast<std::size_t>(p.size()) == k_ + 1, "sphere point: wrong ambient dimension");
  require(std::abs(p.norm() - 1.0) <= tol, "sphere point: |x| != 1");
}

// ---------------------------------------------------------------------------
// projective space

ProjectiveSpace::ProjectiveSpace(std::size_t k) : k_(k) {
  require(k >= 1, "ProjectiveSpace: k >= 1");
}

std::string ProjectiveSpace::name() const { return "rp" + std::to_string(k_); }

double ProjectiveSpace::distance(const Vector& x, const Vector& y) const {
  return clamped_acos(std::abs(x.dot(y)));
}

void ProjectiveSpace::validate_point(const Vector& p, double tol) const {
  require(static_cast<std::size_t>(p.size()) == k_ + 1, "RP^k point: wrong ambient dimension");
  require(std::abs(p.norm() - 1.0) <= tol, "RP^k point: |x| != 1");
}

Vector ProjectiveSpace::canonical_point(Vector p) const {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] != 0.0) {
      if (p[i] < 0) p = -p;
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Euclidean space

EuclideanSpace::EuclideanSpace(std::size_t k) : k_(k) { require(k >= 1, "EuclideanSpace: k >= 1"); }

std::string EuclideanSpace::name() const { return "e" + std::to_string(k_); }

double EuclideanSpace::distance(const Vector& x, const Vector& y) const { return (x - y).norm(); }

void EuclideanSpace::validate_point(const Vector& p, double) const {
  require(static_cast<std::size_t>(p.size()) == k_, "Euclidean point: wrong dimension");
}

// ---------------------------------------------------------------------------
// hyperbolic space

HyperbolicSpace::HyperbolicSpace(std::size_t k, double kappa) : k_(k), kappa_(kappa) {
  require(k >= 1, "HyperbolicSpace: k >= 1");
  require(kappa < 0, "HyperbolicSpace: curvature must be negative");
  radius_ = 1.0 / std::sqrt(-kappa);
}

std::string HyperbolicSpace::name() const {
  std::ostringstream os;
  os << "h" << k_ << ":" << kappa_;
  return os.str();
}

double HyperbolicSpace::minkowski(const Vector& x, const Vector& y) {
  double s = -x[0] * y[0];
  for (Eigen::Index i = 1; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double HyperbolicSpace::distance(const Vector& x, const Vector& y) const {
  // d = R * arccosh(kappa * <x,y>_L); the pairing is <= 1/kappa < 0
  const double c = kappa_ * minkowski(x, y);
  return radius_ * std::acosh(std::max(1.0, c));
}

void HyperbolicSpace::validate_point(const Vector& p, double tol) const {
  require(static_cast<std::size_t>(p.size()) == k_ + 1, "hyperboloid point: wrong dimension");
  require(p[0] > 0, "hyperboloid point: x0 must be positive");
  require(std::abs(minkowski(p, p) - 1.0 / kappa_) <= tol * std::max(1.0, radius_ * radius_),
          "hyperboloid point: <x,x>_L != 1/kappa");
}

Vector HyperbolicSpace::exp(const Vector& p, const Vector& u, double t) const {
  const double th = t / radius_;
  return std::cosh(th) * p + radius_ * std::sinh(th) * u;
}

std::pair<double, Vector> HyperbolicSpace::log(const Vector& p, const Vector& x) const {
  const double rho = distance(p, x);
  if (rho == 0) return {0.0, Vector::Zero(p.size())};
  const double th = rho / radius_;
  Vector u = (x - std::cosh(th) * p) / (radius_ * std::sinh(th));
  return {rho, u};
}

Vector HyperbolicSpace::base_point() const {
  Vector p = Vector::Zero(k_ + 1);
  p[0] = radius_;
  return p;
}

// ---------------------------------------------------------------------------
// flat torus (floating front end over the exact lattice)

TorusSpace::TorusSpace(std::vector<Rational> sides) : lattice_(TorusLattice::rectangular(sides)) {
  for (const auto& s : lattice_.sides()) sides_d_.push_back(to_double(s));
}

std::string TorusSpace::name() const {
  std::string s = "torus:";
  for (std::size_t i = 0; i < sides_d_.size(); ++i) {
    if (i) s += ",";
    s += rational_to_string(lattice_.sides()[i]);
  }
  return s;
}

double TorusSpace::distance(const Vector& x, const Vector& y) const {
  TorusPoint a(lattice_.dim()), b(lattice_.dim());
  for (std::size_t i = 0; i < lattice_.dim(); ++i) {
    a[i] = Rational(x[static_cast<Eigen::Index>(i)]);  // dyadic, exact
    b[i] = Rational(y[static_cast<Eigen::Index>(i)]);
  }
  return torus_distance(lattice_, a, b);
}

void TorusSpace::validate_point(const Vector& p, double) const {
  require(static_cast<std::size_t>(p.size()) == lattice_.dim(), "torus point: wrong dimension");
}

Vector TorusSpace::canonical_point(Vector p) const {
  for (std::size_t i = 0; i < lattice_.dim(); ++i) {
    double& c = p[static_cast<Eigen::Index>(i)];
    c = std::fmod(c, sides_d_[i]);
    if (c < 0) c += sides_d_[i];
  }
  return p;
}

// ---------------------------------------------------------------------------
// products

ProductSpace::ProductSpace(std::vector<SpacePtr> factors) : factors_(std::move(factors)) {
  require(!factors_.empty(), "ProductSpace: need at least one factor");
  for (const auto& f : factors_) {
    offsets_.push_back(total_);
    total_ += f->ambient_dim();
  }
}

std::string ProductSpace::name() const {
  std::string s = "product:";
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += ",";
    s += factors_[i]->name();
  }
  return s;
}

std::size_t ProductSpace::manifold_dim() const {
  std::size_t d = 0;
  for (const auto& f : factors_) d += f->manifold_dim();
  return d;
}

std::size_t ProductSpace::ambient_dim() const { return total_; }

Vector ProductSpace::factor_coords(const Vector& p, std::size_t i) const {
  return p.segment(static_cast<Eigen::Index>(offsets_[i]),
                   static_cast<Eigen::Index>(factors_[i]->ambient_dim()));
}

Vector ProductSpace::assemble(const std::vector<Vector>& parts) const {
  Vector out(static_cast<Eigen::Index>(total_));
  for (std::size_t i = 0; i < parts.size(); ++i)
    out.segment(static_cast<Eigen::Index>(offsets_[i]), parts[i].size()) = parts[i];
  return out;
}

double ProductSpace::distance(const Vector& x, const Vector& y) const {
  double acc = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const double d = factors_[i]->distance(factor_coords(x, i), factor_coords(y, i));
    acc += d * d;
  }
  return std::sqrt(acc);
}

void ProductSpace::validate_point(const Vector& p, double tol) const {
  require(static_cast<std::size_t>(p.size()) == total_, "product point: wrong dimension");
  for (std::size_t i = 0; i < factors_.size(); ++i)
    factors_[i]->validate_point(factor_coords(p, i), tol);
}

Vector ProductSpace::canonical_point(Vector p) const {
  std::vector<Vector> parts;
  parts.reserve(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i)
    parts.push_back(factors_[i]->canonical_point(factor_coords(p, i)));
  return assemble(parts);
}

bool ProductSpace::nonneg_curved() const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](const SpacePtr& f) { return f->nonneg_curved(); });
}

// ---------------------------------------------------------------------------
// isometries

Vector AffineIsometry::apply(const Vector& p) const {
  Vector q = A_ * p + b_;
  if (torus_) q = torus_->canonical_point(std::move(q));
  return q;
}

Vector ProductIsometry::apply(const Vector& p) const {
  std::vector<Vector> parts;
  parts.reserve(parts_.size());
  for (std::size_t i = 0; i < parts_.size(); ++i)
    parts.push_back(parts_[i]->apply(space_.factor_coords(p, i)));
  return space_.assemble(parts);
}

IsometryPtr geodesic_involution(const ModelSpace& S, const Vector& m) {
  S.validate_point(m, 1e-9);
  if (dynamic_cast<const SphereSpace*>(&S) || dynamic_cast<const ProjectiveSpace*>(&S)) {
    const Eigen::Index d = m.size();
    Matrix A = 2.0 * (m * m.transpose()) - Matrix::Identity(d, d);
    return std::make_shared<LinearIsometry>(std::move(A));
  }
  if (dynamic_cast<const EuclideanSpace*>(&S) != nullptr) {
    const Eigen::Index d = m.size();
    return std::make_shared<AffineIsometry>(-Matrix::Identity(d, d), 2.0 * m);
  }
  if (const auto* hyp = dynamic_cast<const HyperbolicSpace*>(&S)) {
    // x -> 2 kappa <x,m>_L m - x  =  (2 kappa m m^T J - Id) x
    const Eigen::Index d = m.size();
    Vector Jm = m;
    Jm[0] = -Jm[0];
    Matrix A = 2.0 * hyp->kappa() * (m * Jm.transpose()) - Matrix::Identity(d, d);
    return std::make_shared<LinearIsometry>(std::move(A));
  }
  if (const auto* prod = dynamic_cast<const ProductSpace*>(&S)) {
    std::vector<IsometryPtr> parts;
    for (std::size_t i = 0; i < prod->factors().size(); ++i)
      parts.push_back(geodesic_involution(*prod->factors()[i], prod->factor_coords(m, i)));
    return std::make_shared<ProductIsometry>(*prod, std::move(parts));
  }
  throw std::invalid_argument("geodesic_involution: unsupported space " + S.name());
}

namespace {

Vector exp_point(const ModelSpace& S, const Vector& p, const Vector& u, double t) {
  if (dynamic_cast<const SphereSpace*>(&S) || dynamic_cast<const ProjectiveSpace*>(&S))
    return sphere_exp(p, u, t);
  if (dynamic_cast<const EuclideanSpace*>(&S)) return p + t * u;
  if (const auto* hyp = dynamic_cast<const HyperbolicSpace*>(&S)) return hyp->exp(p, u, t);
  throw std::invalid_argument("exp_point: unsupported space " + S.name());
}

void check_unit_tangent(const ModelSpace& S, const Vector& p, const Vector& u) {
  constexpr double tol = 1e-9;
  if (dynamic_cast<const SphereSpace*>(&S) || dynamic_cast<const ProjectiveSpace*>(&S)) {
    require(std::abs(u.norm() - 1.0) <= tol, "transvection: u must be unit");
    require(std::abs(u.dot(p)) <= tol, "transvection: u must be tangent at p");
    return;
  }
  if (dynamic_cast<const EuclideanSpace*>(&S)) {
    require(std::abs(u.norm() - 1.0) <= tol, "transvection: u must be unit");
    return;
  }
  if (dynamic_cast<const HyperbolicSpace*>(&S)) {
    require(std::abs(HyperbolicSpace::minkowski(u, u) - 1.0) <= tol,
            "transvection: <u,u>_L must be 1");
    require(std::abs(HyperbolicSpace::minkowski(u, p)) <= tol,
            "transvection: u must be Minkowski-orthogonal to p");
    return;
  }
  throw std::invalid_argument("transvection: unsupported space " + S.name());
}

}  // namespace

IsometryPtr transvection(const ModelSpace& S, const Vector& p, const Vector& u, double T) {
  S.validate_point(p, 1e-9);
  if (dynamic_cast<const TorusSpace*>(&S) || dynamic_cast<const ProductSpace*>(&S))
    throw std::invalid_argument(
        "transvection: use translation/product isometries for tori and products");
  check_unit_tangent(S, p, u);
  const Vector q = exp_point(S, p, u, -T / 2.0);
  auto sp = geodesic_involution(S, p);
  auto sq = geodesic_involution(S, q);

  // compose; both factors are linear or affine over the same space
  if (const auto* lp = dynamic_cast<const LinearIsometry*>(sp.get())) {
    const auto* lq = dynamic_cast<const LinearIsometry*>(sq.get());
    return std::make_shared<LinearIsometry>(lp->matrix() * lq->matrix());
  }
  // Euclidean: s_p o s_q = translation by 2(p - q)
  return std::make_shared<AffineIsometry>(Matrix::Identity(p.size(), p.size()), 2.0 * (p - q));
}

Vector sphere_exp(const Vector& p, const Vector& u, double t) {
  return std::cos(t) * p + std::sin(t) * u;
}

// ---------------------------------------------------------------------------
// orbit experiments

OrbitSpectrumResult isometry_orbit_spectrum(const ModelSpace& S, const Isometry& I, Vector p,
                                            std::size_t n, double tau,
                                            std::optional<std::size_t> ceiling, double dedup_eps) {
  if (n < 1) throw std::invalid_argument("isometry_orbit_spectrum: n must be >= 1");
  S.validate_point(p, 1e-9);

  OrbitSpectrumResult res;
  res.orbit.reserve(n + 1);
  Vector cur = p;
  for (std::size_t i = 0; i <= n; ++i) {
    res.orbit.push_back(cur);
    if (i < n) cur = I.apply(cur);
  }

  // collapse duplicates (periodic orbits)
  for (const Vector& x : res.orbit) {
    bool dup = false;
    for (const Vector& y : res.distinct) {
      if (S.distance(x, y) <= dedup_eps) {
        dup = true;
        break;
      }
    }
    if (dup)
      ++res.collapsed;
    else
      res.distinct.push_back(x);
  }

  if (res.distinct.size() < 2) {
    res.degenerate = true;
    return res;
  }

  const auto& pts = res.distinct;
  MetricOracle<double> oracle(
      pts.size(), [&](std::size_t i, std::size_t j) { return S.distance(pts[i], pts[j]); },
      /*exact=*/false, /*abs_error=*/1e-12);
  res.spectrum = nnd_spectrum(oracle, ClusterPolicy::rel_tol(tau));

  if (ceiling && res.spectrum.distinct_count() > *ceiling) {
    throw OrbitBoundViolation("orbit NND count " + std::to_string(res.spectrum.distinct_count()) +
                                  " exceeds ceiling " + std::to_string(*ceiling) + " on " + S.name(),
                              res.spectrum.distinct_count(), *ceiling);
  }
  return res;
}

std::vector<double> orbit_nnd_sequence(const ModelSpace& S, const Isometry& I, Vector p,
                                       std::size_t n) {
  if (n < 1) throw std::invalid_argument("orbit_nnd_sequence: n must be >= 1");
  std::vector<Vector> orbit;
  orbit.reserve(n + 1);
  Vector cur = p;
  for (std::size_t i = 0; i <= n; ++i) {
    orbit.push_back(cur);
    if (i < n) cur = I.apply(cur);
  }
  std::vector<double> nnd(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == j) continue;
      nnd[i] = std::min(nnd[i], S.distance(orbit[i], orbit[j]));
    }
  return nnd;
}

SpacePtr product_space(SpacePtr s1, SpacePtr s2) {
  return std::make_shared<ProductSpace>(std::vector<SpacePtr>{std::move(s1), std::move(s2)});
}

}  // namespace gapscope
