// gapscope - constant-curvature model spaces and their products: distances,
// point reflections, transvections, and isometry-orbit NND experiments.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapscope/metric.hpp"
#include "gapscope/torus.hpp"

namespace gapscope {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ModelSpace {
 public:
  virtual ~ModelSpace() = default;
  virtual std::string name() const = 0;
  virtual std::size_t manifold_dim() const = 0;
  virtual std::size_t ambient_dim() const = 0;
  virtual double distance(const Vector& x, const Vector& y) const = 0;
  // throws std::invalid_argument when the normalization constraint fails
  virtual void validate_point(const Vector& p, double tol = 1e-12) const = 0;
  virtual Vector canonical_point(Vector p) const { return p; }
  virtual bool nonneg_curved() const = 0;
};

using SpacePtr = std::shared_ptr<const ModelSpace>;

// S^k as unit vectors in R^{k+1}; distance arccos<x,y>.
class SphereSpace final : public ModelSpace {
 public:
  explicit SphereSpace(std::size_t k);
  std::string name() const override;
  std::size_t manifold_dim() const override { return k_; }
  std::size_t ambient_dim() const override { return k_ + 1; }
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  bool nonneg_curved() const override { return true; }

 private:
  std::size_t k_;
};

// RP^k as unit vectors mod sign; distance arccos|<x,y>| in [0, pi/2];
// canonical representative has its first nonzero coordinate positive.
class ProjectiveSpace final : public ModelSpace {
 public:
  explicit ProjectiveSpace(std::size_t k);
  std::string name() const override;
  std::size_t manifold_dim() const override { return k_; }
  std::size_t ambient_dim() const override { return k_ + 1; }
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  Vector canonical_point(Vector p) const override;
  bool nonneg_curved() const override { return true; }

 private:
  std::size_t k_;
};

class EuclideanSpace final : public ModelSpace {
 public:
  explicit EuclideanSpace(std::size_t k);
  std::string name() const override;
  std::size_t manifold_dim() const override { return k_; }
  std::size_t ambient_dim() const override { return k_; }
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  bool nonneg_curved() const override { return true; }

 private:
  std::size_t k_;
};

// H^k with curvature kappa < 0, hyperboloid model: <x,x>_L = 1/kappa, x0 > 0,
// Minkowski form <x,y>_L = -x0 y0 + sum x_i y_i.
class HyperbolicSpace final : public ModelSpace {
 public:
  HyperbolicSpace(std::size_t k, double kappa);
  std::string name() const override;
  std::size_t manifold_dim() const override { return k_; }
  std::size_t ambient_dim() const override { return k_ + 1; }
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  bool nonneg_curved() const override { return false; }

  double kappa() const { return kappa_; }
  double radius() const { return radius_; }
  static double minkowski(const Vector& x, const Vector& y);
  // geodesic through p with unit tangent u (<u,u>_L = 1, <u,p>_L = 0)
  Vector exp(const Vector& p, const Vector& u, double t) const;
  // inverse: returns (rho, u) with x = exp(p, u, rho)
  std::pair<double, Vector> log(const Vector& p, const Vector& x) const;
  Vector base_point() const;  // (R, 0, ..., 0)

 private:
  std::size_t k_;
  double kappa_;
  double radius_;
};

// Rectangular flat torus with floating coordinates; distances are evaluated
// exactly (doubles are dyadic rationals) and returned as double.
class TorusSpace final : public ModelSpace {
 public:
  explicit TorusSpace(std::vector<Rational> sides);
  std::string name() const override;
  std::size_t manifold_dim() const override { return lattice_.dim(); }
  std::size_t ambient_dim() const override { return lattice_.dim(); }
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  Vector canonical_point(Vector p) const override;
  bool nonneg_curved() const override { return true; }
  const TorusLattice& lattice() const { return lattice_; }

 private:
  TorusLattice lattice_;
  std::vector<double> sides_d_;
};

// Riemannian product with distance sqrt(sum of factor distances squared);
// points are concatenated factor coordinates.
class ProductSpace final : public ModelSpace {
 public:
  explicit ProductSpace(std::vector<SpacePtr> factors);
  std::string name() const override;
  std::size_t manifold_dim() const override;
  std::size_t ambient_dim() const override;
  double distance(const Vector& x, const Vector& y) const override;
  void validate_point(const Vector& p, double tol) const override;
  Vector canonical_point(Vector p) const override;
  bool nonneg_curved() const override;

  const std::vector<SpacePtr>& factors() const { return factors_; }
  Vector factor_coords(const Vector& p, std::size_t i) const;
  Vector assemble(const std::vector<Vector>& parts) const;

 private:
  std::vector<SpacePtr> factors_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

// ---------------------------------------------------------------------------
// isometries

class Isometry {
 public:
  virtual ~Isometry() = default;
  virtual Vector apply(const Vector& p) const = 0;
};

using IsometryPtr = std::shared_ptr<const Isometry>;

// linear A*x (sphere/RP orthogonal, hyperbolic Lorentz)
class LinearIsometry final : public Isometry {
 public:
  explicit LinearIsometry(Matrix A) : A_(std::move(A)) {}
  Vector apply(const Vector& p) const override { return A_ * p; }
  const Matrix& matrix() const { return A_; }

 private:
  Matrix A_;
};

// affine A*x + b (Euclidean / torus translations; torus reduces mod sides)
class AffineIsometry final : public Isometry {
 public:
  AffineIsometry(Matrix A, Vector b, const TorusSpace* torus = nullptr)
      : A_(std::move(A)), b_(std::move(b)), torus_(torus) {}
  Vector apply(const Vector& p) const override;

 private:
  Matrix A_;
  Vector b_;
  const TorusSpace* torus_;
};

class ProductIsometry final : public Isometry {
 public:
  ProductIsometry(const ProductSpace& space, std::vector<IsometryPtr> parts)
      : space_(space), parts_(std::move(parts)) {}
  Vector apply(const Vector& p) const override;

 private:
  const ProductSpace& space_;
  std::vector<IsometryPtr> parts_;
};

// Geodesic involution s_m (sphere/RP: x -> 2<x,m>m - x; Euclidean: 2m - x;
// hyperbolic: 2 kappa <x,m>_L m - x).
IsometryPtr geodesic_involution(const ModelSpace& S, const Vector& m);

// Transvection I = s_p o s_q with q = exp_p(-(T/2) u); translates by T along
// the geodesic through p with unit tangent u. Throws for non-tangent or
// non-unit u (tolerance 1e-9).
IsometryPtr transvection(const ModelSpace& S, const Vector& p, const Vector& u, double T);

// Great-circle closed form, the oracle for sphere transvections.
Vector sphere_exp(const Vector& p, const Vector& u, double t);

// ---------------------------------------------------------------------------
// orbit experiments

struct OrbitBoundViolation : std::runtime_error {
  OrbitBoundViolation(const std::string& what, std::size_t observed, std::size_t ceiling)
      : std::runtime_error(what), observed(observed), ceiling(ceiling) {}
  std::size_t observed;
  std::size_t ceiling;
};

struct OrbitSpectrumResult {
  std::vector<Vector> orbit;       // raw orbit x_0..x_n
  std::vector<Vector> distinct;    // collapsed points fed to the spectrum
  bool degenerate = false;         // fewer than 2 distinct points
  NndSpectrum<double> spectrum;    // empty when degenerate
  std::size_t collapsed = 0;       // orbit points merged into earlier ones
};

// NND({I^i p : i = 0..n}) with tau-clustering. Duplicate orbit points (within
// dedup_eps) are collapsed first. If ceiling is set, throws
// OrbitBoundViolation when |NND| exceeds it (experiment mode).
OrbitSpectrumResult isometry_orbit_spectrum(const ModelSpace& S, const Isometry& I, Vector p,
                                            std::size_t n, double tau = 1e-9,
                                            std::optional<std::size_t> ceiling = std::nullopt,
                                            double dedup_eps = 1e-9);

// nnd(I^i(p), O_n) for i = 0..n, computed all-pairs on the raw orbit.
// Requires the orbit to have no duplicate points; used by the identity and
// monotonicity checks.
std::vector<double> orbit_nnd_sequence(const ModelSpace& S, const Isometry& I, Vector p,
                                       std::size_t n);

SpacePtr product_space(SpacePtr s1, SpacePtr s2);

}  // namespace gapscope
