// gapscope - exact rational arithmetic helpers on top of GMP.
#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapscope {

using Integer = mpz_class;
using Rational = mpq_class;

// Parses "a/b", plain integers, and decimal literals ("0.125", "-3.5").
// Decimals become exact rationals (125/1000 canonicalized), so CLI input
// never loses precision. Throws std::invalid_argument on malformed text.
Rational parse_rational(const std::string& text);

// Canonical "p/q" (or "p" when q == 1).
std::string rational_to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(const Integer& z) { return z.get_d(); }

// floor(x) as an Integer (works for negative x).
Integer rational_floor(const Rational& x);

// x mod m reduced into [0, m). Requires m > 0.
Rational mod_interval(const Rational& x, const Rational& m);

// x mod 1 reduced into [0, 1).
inline Rational mod_one(const Rational& x) { return mod_interval(x, Rational(1)); }

inline Rational sq(const Rational& x) { return x * x; }

// Parse a comma-separated list of rationals ("1,1/2,0.25").
std::vector<Rational> parse_rational_list(const std::string& text);

}  // namespace gapscope
