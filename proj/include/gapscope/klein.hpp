// gapscope - the flat Klein bottle: quotient of the plane by a glide
// reflection g:(x,y)->(x+w,-y) and a translation t:(x,y)->(x,y+h). Every
// group element is t^n g^m : (x,y) -> (x + m w, (-1)^m y + n h). Distances
// and geodesic self-intersections are exact over the rationals.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "gapscope/rational.hpp"

namespace gapscope {

using PlanePoint = std::array<Rational, 2>;

class KleinQuotient {
 public:
  KleinQuotient(Rational w, Rational h);

  const Rational& w() const { return w_; }
  const Rational& h() const { return h_; }

  // Representative in the fundamental domain [0,w) x [0,h). parity (when
  // requested) reports whether an odd glide power was applied, i.e. whether
  // tangent vectors at p transport with their y-component flipped.
  PlanePoint canonical(const PlanePoint& p, int* parity = nullptr) const;

  // Exact squared quotient distance (enumerates group images within the
  // radius implied by the best candidate so far).
  Rational distance2(const PlanePoint& p, const PlanePoint& q) const;
  double distance(const PlanePoint& p, const PlanePoint& q) const;

 private:
  Rational w_, h_;
};

// One transverse self-intersection of a straight-line geodesic, exact.
// Parameters t1 < t2 are in direction-step units: the geodesic is
// tau -> start + tau * (a, b), so arc length = tau * sqrt(a^2 + b^2).
struct KleinIntersection {
  Rational t1, t2;
  long m = 0, n = 0;           // group element t^n g^m mapping branch 1 to branch 2
  PlanePoint location;          // canonical representative
  Rational cos_alpha;           // (a^2 - b^2) / (a^2 + b^2), exact
  // arc-length quantities (s = t1*|d|, t = t2*|d|); s2, t2s, st are exact
  Rational s_sq, t_sq, st;
  double s = 0, t = 0, alpha = 0;
};

struct KleinIntersectionReport {
  std::vector<KleinIntersection> records;       // ordered by (t1, t2)
  std::vector<PlanePoint> locations;            // distinct intersection points
  std::vector<std::size_t> multiplicities;      // branch pairs per location
  std::size_t total = 0;                        // sum of multiplicities = records
  bool overlap = false;  // geodesic maps onto itself under a nonidentity element
};

// Transverse self-intersections of the geodesic tau -> start + tau*(a,b),
// 0 < tau < length/|(a,b)| (open segment), on the quotient. direction is an
// integer vector, reduced internally; length is Euclidean arc length.
// Exact: parameters, locations and cos(angle) are rationals.
KleinIntersectionReport klein_geodesic_intersections(const KleinQuotient& K,
                                                     const PlanePoint& start, long dir_x,
                                                     long dir_y, const Rational& length);

// Sampled quotient trajectory for the numeric self-intersection pipeline:
// positions are canonical fundamental-domain representatives, velocities are
// unit vectors transported with glide parity.
struct KleinTrajectory {
  const KleinQuotient* quotient = nullptr;
  double w = 0, h = 0;
  std::vector<double> t;                    // arc-length parameters
  std::vector<std::array<double, 2>> x;     // canonical positions
  std::vector<std::array<double, 2>> v;     // unit velocities in the local chart
};

KleinTrajectory klein_trajectory(const KleinQuotient& K, const PlanePoint& start, long dir_x,
                                 long dir_y, double length, double step);

}  // namespace gapscope
