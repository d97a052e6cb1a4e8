// gapscope - flat quotients of Euclidean k-space: rectangular and general
// lattices, exact quotient distance, translation orbits, and the
// many-distinct-gaps construction on prime-sided tori with its exact
// certificate.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapscope/metric.hpp"
#include "gapscope/rational.hpp"

namespace gapscope {

using TorusPoint = std::vector<Rational>;

class TorusLattice {
 public:
  // Rectangular lattice spanned by side_i * e_i.
  static TorusLattice rectangular(std::vector<Rational> sides);
  // General full-rank basis (columns), k <= 4.
  static TorusLattice general(std::vector<std::vector<Rational>> basis_columns);

  std::size_t dim() const { return k_; }
  bool is_rectangular() const { return rectangular_; }
  const std::vector<Rational>& sides() const { return sides_; }
  const std::vector<std::vector<Rational>>& basis() const { return basis_; }

  // Canonical representative: coordinates reduced mod side lengths
  // (rectangular) or B * frac(B^-1 x) (general).
  TorusPoint canonical(const TorusPoint& p) const;

 private:
  TorusLattice() = default;
  std::size_t k_ = 0;
  bool rectangular_ = true;
  std::vector<Rational> sides_;
  std::vector<std::vector<Rational>> basis_;     // columns
  std::vector<std::vector<Rational>> basis_inv_; // exact inverse (general mode)
  friend Rational torus_distance2(const TorusLattice&, const TorusPoint&, const TorusPoint&);
};

// Exact squared quotient distance: min over lattice translates.
Rational torus_distance2(const TorusLattice& L, const TorusPoint& x, const TorusPoint& y);
double torus_distance(const TorusLattice& L, const TorusPoint& x, const TorusPoint& y);

// x_i = canonical(p0 + i*v), i = 0..n. Flags nothing; callers detect the
// degenerate v = 0 via orbit_period.
std::vector<TorusPoint> translation_orbit(const TorusLattice& L, const TorusPoint& v,
                                          const TorusPoint& p0, std::size_t n);

// Smallest m in [1, limit] with m*v = 0 in the quotient, or 0 if none.
std::size_t orbit_period(const TorusLattice& L, const TorusPoint& v, std::size_t limit);

// Exact NND spectrum (of squared distances) of the translation orbit
// {i*v : i = 0..n}. Uses the orbit identity dist(x_i, x_j) = dist(x_0,
// x_{|i-j|}), exact for lattice translations, so the whole spectrum comes
// from one pass of prefix minima over D(m) = dist^2(x_0, x_m); validated
// against the all-pairs baseline in tests. Periodic orbits collapse to one
// homogeneous class.
NndSpectrum<Rational> translation_orbit_spectrum(const TorusLattice& L, const TorusPoint& v,
                                                 std::size_t n);

// ---------------------------------------------------------------------------
// Tori with many distinct nearest neighbor distances

struct ManyGapsCertificate {
  std::vector<unsigned long> primes;  // distinct odd primes p_1..p_k
  std::size_t k = 0;
  Integer N;                          // product of the primes
  std::vector<Integer> inverses;      // pi_j in {1..p_j-1}, inverse of N/p_j mod p_j
  std::vector<Integer> a;             // a_j = max(pi_j, p_j - pi_j) * N / p_j
  std::vector<int> delta;             // +-1, from reducing (a_j,...,a_j) to +-e_j
  Rational s;                         // perturbation actually used
  bool s_was_auto = true;

  std::vector<Rational> dist2;        // exact dist^2(x_{a_j}, x_0)
  std::vector<Rational> formula2;     // 1 - 2 a_j s + k (a_j s)^2

  std::vector<bool> nn_is_x0;         // check (i) per j
  std::vector<bool> formula_match;    // check (ii) per j
  bool distances_distinct = false;    // check (iii)
  bool monotone_decreasing = false;   // dist decreasing as a_j increases
  bool points_distinct = false;       // orbit has N distinct points
  std::size_t tie_count = 0;          // m != a_j achieving the same minimum

  std::string engine;                 // "int128" or "mpq"
  std::size_t nnd_lower_bound = 0;    // = k when the certificate holds

  bool holds() const;
};

struct CertificateFailure : std::runtime_error {
  CertificateFailure(std::string what, ManyGapsCertificate cert, std::size_t failing_j)
      : std::runtime_error(std::move(what)), certificate(std::move(cert)), failing(failing_j) {}
  ManyGapsCertificate certificate;
  std::size_t failing;
};

// Builds the prime-sided torus orbit certificate and verifies it in exact
// arithmetic. s defaults to 1/(2 k N^2). Throws std::invalid_argument for
// repeated/even/non-prime inputs and CertificateFailure when a check fails
// (s too large). force_generic_engine skips the fixed-denominator integer
// fast path (used to cross-validate the two engines).
ManyGapsCertificate many_gaps_construction(const std::vector<unsigned long>& primes,
                                           std::optional<Rational> s = std::nullopt,
                                           bool force_generic_engine = false);

// The orbit X = {x_0..x_{N-1}} of the certificate's translation, exact.
// Intended for small N (tests, --emit-orbit).
std::vector<TorusPoint> many_gaps_orbit(const ManyGapsCertificate& cert);

// Rectangular lattice with the certificate's prime side lengths.
TorusLattice many_gaps_lattice(const ManyGapsCertificate& cert);

// All odd-prime tuples (ascending, deduplicated) with prime product <= bound.
std::vector<std::vector<unsigned long>> odd_prime_tuples_up_to(unsigned long bound);

}  // namespace gapscope
