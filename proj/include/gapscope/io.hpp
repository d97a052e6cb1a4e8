// gapscope - serialization: line-oriented point sets (exact rationals or
// decimals), spectra as CSV, deterministic float formatting.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gapscope/metric.hpp"
#include "gapscope/rational.hpp"

namespace gapscope {

// shortest round-trip double formatting ("%.17g"), deterministic per build
std::string format_double(double v);

// one point per line, coordinates whitespace-separated, "p/q" or decimals
void write_point_set(std::ostream& os, const std::vector<std::vector<Rational>>& points);
std::vector<std::vector<Rational>> read_point_set(std::istream& is);

// CSV columns: point_index, nnd_value, class_index
std::string spectrum_csv(const NndSpectrum<double>& s);
std::string spectrum_csv(const NndSpectrum<Rational>& s);

}  // namespace gapscope
