// gapscope - implicit surfaces F(x) = 0 in R^3 with analytic gradient,
// Hessian and Gauss curvature for the builtin testbeds.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>

namespace gapscope {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class ImplicitSurface {
 public:
  virtual ~ImplicitSurface() = default;
  virtual std::string name() const = 0;
  virtual double F(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual Mat3 hessian(const Vec3& x) const = 0;

  // Builtins override with closed forms; the default evaluates the implicit
  // formula grad^T adj(H) grad / |grad|^4.
  virtual double gauss_curvature(const Vec3& x) const;

  // Upper bound for |principal curvature| over the surface: drives chordal
  // pruning margins in the NND refinement.
  virtual double curvature_bound() const = 0;

  // Newton projection along the gradient; throws on a singular gradient.
  Vec3 project(Vec3 x, double tol = 1e-14, int max_iter = 50) const;
  // Remove the normal component of v at the (on-surface) point x.
  Vec3 tangential(const Vec3& x, Vec3 v) const;
  // Random-ish deterministic point on the surface near a seed direction.
  Vec3 point_from_direction(const Vec3& dir) const;
};

using SurfacePtr = std::shared_ptr<const ImplicitSurface>;

// Implicit-formula Gauss curvature, independent of the analytic overrides
// (the other half of the dual-route check in tests).
double implicit_gauss_curvature(const ImplicitSurface& S, const Vec3& x);

class UnitSphere final : public ImplicitSurface {
 public:
  std::string name() const override { return "sphere"; }
  double F(const Vec3& x) const override { return x.squaredNorm() - 1.0; }
  Vec3 gradient(const Vec3& x) const override { return 2.0 * x; }
  Mat3 hessian(const Vec3&) const override { return 2.0 * Mat3::Identity(); }
  double gauss_curvature(const Vec3&) const override { return 1.0; }
  double curvature_bound() const override { return 1.0; }
};

// x^2/a^2 + y^2/b^2 + z^2/c^2 = 1
class Ellipsoid final : public ImplicitSurface {
 public:
  Ellipsoid(double a, double b, double c);
  std::string name() const override;
  double F(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  Mat3 hessian(const Vec3&) const override;
  double gauss_curvature(const Vec3& x) const override;
  double curvature_bound() const override;
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double a_, b_, c_;
};

// (sqrt(x^2+y^2) - R)^2 + z^2 = r^2, R > r > 0
class RevolutionTorus final : public ImplicitSurface {
 public:
  RevolutionTorus(double R, double r);
  std::string name() const override;
  double F(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  Mat3 hessian(const Vec3& x) const override;
  double gauss_curvature(const Vec3& x) const override;
  double curvature_bound() const override;

 private:
  double R_, r_;
};

// Parse "sphere", "ellipsoid:a,b,c", "torus-rev:R,r".
SurfacePtr make_surface(const std::string& descriptor);

}  // namespace gapscope
