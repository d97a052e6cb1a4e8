#include "gapscope/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace gapscope {

double implicit_gauss_curvature(const ImplicitSurface& S, const Vec3& x) {
  const Vec3 g = S.gradient(x);
  const Mat3 H = S.hessian(x);
  // adjugate of a symmetric 3x3
  Mat3 adj;
  adj(0, 0) = H(1, 1) * H(2, 2) - H(1, 2) * H(2, 1);
  adj(0, 1) = H(0, 2) * H(2, 1) - H(0, 1) * H(2, 2);
  adj(0, 2) = H(0, 1) * H(1, 2) - H(0, 2) * H(1, 1);
  adj(1, 0) = H(1, 2) * H(2, 0) - H(1, 0) * H(2, 2);
  adj(1, 1) = H(0, 0) * H(2, 2) - H(0, 2) * H(2, 0);
  adj(1, 2) = H(0, 2) * H(1, 0) - H(0, 0) * H(1, 2);
  adj(2, 0) = H(1, 0) * H(2, 1) - H(1, 1) * H(2, 0);
  adj(2, 1) = H(0, 1) * H(2, 0) - H(0, 0) * H(2, 1);
  adj(2, 2) = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  const double g2 = g.squaredNorm();
  return g.dot(adj * g) / (g2 * g2);
}

double ImplicitSurface::gauss_curvature(const Vec3& x) const {
  return implicit_gauss_curvature(*this, x);
}

Vec3 ImplicitSurface::project(Vec3 x, double tol, int max_iter) const {
  for (int i = 0; i < max_iter; ++i) {
    const double f = F(x);
    if (std::abs(f) <= tol) return x;
    const Vec3 g = gradient(x);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-20) throw std::runtime_error("ImplicitSurface::project: singular gradient");
    x -= (f / g2) * g;
  }
  if (std::abs(F(x)) > 1e-10)
    throw std::runtime_error("ImplicitSurface::project: Newton did not converge");
  return x;
}

Vec3 ImplicitSurface::tangential(const Vec3& x, Vec3 v) const {
  const Vec3 g = gradient(x);
  const double g2 = g.squaredNorm();
  if (g2 < 1e-20) throw std::runtime_error("ImplicitSurface::tangential: singular gradient");
  v -= (v.dot(g) / g2) * g;
  return v;
}

Vec3 ImplicitSurface::point_from_direction(const Vec3& dir) const {
  Vec3 d = dir;
  if (d.norm() < 1e-12) d = Vec3(1, 0, 0);
  d.normalize();
  // march out from a scaled direction and project
  return project(1.5 * d);
}

// ---------------------------------------------------------------------------

Ellipsoid::Ellipsoid(double a, double b, double c) : a_(a), b_(b), c_(c) {
  if (!(a > 0 && b > 0 && c > 0))
    throw std::invalid_argument("Ellipsoid: semi-axes must be positive");
}

std::string Ellipsoid::name() const {
  std::ostringstream os;
  os << "ellipsoid:" << a_ << "," << b_ << "," << c_;
  return os.str();
}

double Ellipsoid::F(const Vec3& x) const {
  return x[0] * x[0] / (a_ * a_) + x[1] * x[1] / (b_ * b_) + x[2] * x[2] / (c_ * c_) - 1.0;
}

Vec3 Ellipsoid::gradient(const Vec3& x) const {
  return {2 * x[0] / (a_ * a_), 2 * x[1] / (b_ * b_), 2 * x[2] / (c_ * c_)};
}

Mat3 Ellipsoid::hessian(const Vec3&) const {
  Mat3 H = Mat3::Zero();
  H(0, 0) = 2 / (a_ * a_);
  H(1, 1) = 2 / (b_ * b_);
  H(2, 2) = 2 / (c_ * c_);
  return H;
}

double Ellipsoid::gauss_curvature(const Vec3& x) const {
  // K = 1 / (a^2 b^2 c^2 (x^2/a^4 + y^2/b^4 + z^2/c^4)^2)
  const double s = x[0] * x[0] / std::pow(a_, 4) + x[1] * x[1] / std::pow(b_, 4) +
                   x[2] * x[2] / std::pow(c_, 4);
  return 1.0 / (a_ * a_ * b_ * b_ * c_ * c_ * s * s);
}

double Ellipsoid::curvature_bound() const {
  const double hi = std::max({a_, b_, c_});
  const double lo = std::min({a_, b_, c_});
  return hi / (lo * lo);  // max principal curvature of an ellipsoid
}

// ---------------------------------------------------------------------------

RevolutionTorus::RevolutionTorus(double R, double r) : R_(R), r_(r) {
  if (!(R > r && r > 0)) throw std::invalid_argument("RevolutionTorus: need R > r > 0");
}

std::string RevolutionTorus::name() const {
  std::ostringstream os;
  os << "torus-rev:" << R_ << "," << r_;
  return os.str();
}

double RevolutionTorus::F(const Vec3& x) const {
  const double rho = std::hypot(x[0], x[1]);
  const double d = rho - R_;
  return d * d + x[2] * x[2] - r_ * r_;
}

Vec3 RevolutionTorus::gradient(const Vec3& x) const {
  const double rho = std::hypot(x[0], x[1]);
  const double f = 2.0 * (rho - R_) / rho;
  return {f * x[0], f * x[1], 2.0 * x[2]};
}

Mat3 RevolutionTorus::hessian(const Vec3& x) const {
  const double rho2 = x[0] * x[0] + x[1] * x[1];
  const double rho = std::sqrt(rho2);
  const double rho3 = rho2 * rho;
  Mat3 H = Mat3::Zero();
  // d/dxi of 2 (1 - R/rho) xj
  H(0, 0) = 2.0 * (1.0 - R_ / rho + R_ * x[0] * x[0] / rho3);
  H(1, 1) = 2.0 * (1.0 - R_ / rho + R_ * x[1] * x[1] / rho3);
  H(0, 1) = H(1, 0) = 2.0 * R_ * x[0] * x[1] / rho3;
  H(2, 2) = 2.0;
  return H;
}

double RevolutionTorus::gauss_curvature(const Vec3& x) const {
  // K = cos(psi) / (r (R + r cos psi)) with cos(psi) = (rho - R)/r
  const double rho = std::hypot(x[0], x[1]);
  return (rho - R_) / (r_ * r_ * rho);
}

double RevolutionTorus::curvature_bound() const { return 1.0 / r_ + 1.0 / (R_ - r_); }

// ---------------------------------------------------------------------------

SurfacePtr make_surface(const std::string& descriptor) {
  auto parse3 = [](const std::string& args) {
    std::vector<double> v;
    std::stringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  };
  if (descriptor == "sphere") return std::make_shared<UnitSphere>();
  if (descriptor.rfind("ellipsoid:", 0) == 0) {
    auto v = parse3(descriptor.substr(10));
    if (v.size() != 3) throw std::invalid_argument("ellipsoid needs a,b,c");
    return std::make_shared<Ellipsoid>(v[0], v[1], v[2]);
  }
  if (descriptor.rfind("torus-rev:", 0) == 0) {
    auto v = parse3(descriptor.substr(10));
    if (v.size() != 2) throw std::invalid_argument("torus-rev needs R,r");
    return std::make_shared<RevolutionTorus>(v[0], v[1]);
  }
  throw std::invalid_argument("unknown surface descriptor: " + descriptor);
}

}  // namespace gapscope
