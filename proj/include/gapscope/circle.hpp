// gapscope - rotation orbits on the circle and the Three Gap Theorem.
//
// Exact orbits keep residues as integer numerators over one common
// denominator, so sorting, gaps and nearest-neighbor distances are pure
// integer arithmetic. Floating orbits cover irrational rotation amounts.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapscope/metric.hpp"
#include "gapscope/rational.hpp"

namespace gapscope {

// Distinct residues out of {offset + i*p mod 1 : i = 0..n}, with collapsed
// multiplicities (rational p with small denominator repeats points).
struct ExactCircleOrbit {
  Rational p;                       // rotation amount, reduced into [0,1)
  Rational offset;                  // basepoint
  std::size_t n = 0;                // orbit index runs 0..n
  Integer den;                      // common denominator of all residues
  std::vector<Integer> raw;         // n+1 residue numerators, orbit order
  std::vector<Integer> distinct;    // sorted distinct numerators
  std::vector<std::size_t> multiplicity;  // parallel to distinct

  std::size_t distinct_count() const { return distinct.size(); }
  Rational residue(std::size_t orbit_index) const {
    Rational r(raw.at(orbit_index), den);
    r.canonicalize();
    return r;
  }
};

struct FloatCircleOrbit {
  double p = 0;
  double offset = 0;
  std::size_t n = 0;
  std::vector<double> raw;       // n+1 residues in [0,1)
  std::vector<double> distinct;  // sorted, collapsed at spacing <= collapse_eps
  std::vector<std::size_t> multiplicity;
  double collapse_eps = 1e-12;
};

struct DegenerateOrbitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an exact-mode postcondition backed by the theorem fails; that
// means a bug, and the carried instance makes it replayable.
struct ThreeGapViolation : std::runtime_error {
  explicit ThreeGapViolation(const std::string& what) : std::runtime_error(what) {}
};

ExactCircleOrbit rotation_orbit(const Rational& p, std::size_t n, const Rational& offset = Rational(0));
FloatCircleOrbit rotation_orbit_float(double p, std::size_t n, double offset = 0.0);

// Distinct consecutive-gap values on the circle of circumference 1,
// wraparound gap included, ascending. Verifies the classical <= 3 bound and
// throws ThreeGapViolation if it ever fails (exact mode).
std::vector<Rational> circular_gap_spectrum(const ExactCircleOrbit& o);
std::vector<double> circular_gap_spectrum(const FloatCircleOrbit& o, double tau = 1e-9);

enum class CircleMetric { Arc, Chord };

// NND spectrum of the distinct orbit points under the arc metric
// min(|x-y|, 1-|x-y|). Exact; verifies |NND| <= 3 (geometric Three Gap
// Theorem) and throws ThreeGapViolation otherwise.
NndSpectrum<Rational> geometric_nnd_spectrum(const ExactCircleOrbit& o);

// Floating spectra; Chord uses 2 sin(pi * arcdist) for the circle embedded in
// the plane with circumference 1.
NndSpectrum<double> geometric_nnd_spectrum(const FloatCircleOrbit& o, CircleMetric metric,
                                           double tau = 1e-9);
NndSpectrum<double> geometric_nnd_spectrum_chord(const ExactCircleOrbit& o, double tau = 1e-9);

// All-pairs arc-metric oracle over the distinct residues; the baseline the
// sorted-gap path is validated against.
MetricOracle<Rational> circle_arc_oracle(const ExactCircleOrbit& o);

}  // namespace gapscope
