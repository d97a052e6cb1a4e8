#include "gapscope/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace gapscope {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_point_set(std::ostream& os, const std::vector<std::vector<Rational>>& points) {
  for (const auto& p : points) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ' ';
      os << rational_to_string(p[i]);
    }
    os << '\n';
  }
}

std::vector<std::vector<Rational>> read_point_set(std::istream& is) {
  std::vector<std::vector<Rational>> points;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<Rational> p;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) p.push_back(parse_rational(tok));
    if (!p.empty()) points.push_back(std::move(p));
  }
  return points;
}

namespace {

template <class D>
std::string spectrum_csv_impl(const NndSpectrum<D>& s, std::string (*fmt)(const D&)) {
  std::string out = "point_index,nnd_value,class_index\n";
  for (std::size_t i = 0; i < s.per_point.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += fmt(s.per_point[i]);
    out += ',';
    out += std::to_string(s.class_of[i]);
    out += '\n';
  }
  return out;
}

std::string fmt_d(const double& v) { return format_double(v); }
std::string fmt_q(const Rational& v) { return rational_to_string(v); }

}  // namespace

std::string spectrum_csv(const NndSpectrum<double>& s) { return spectrum_csv_impl<double>(s, fmt_d); }
std::string spectrum_csv(const NndSpectrum<Rational>& s) {
  return spectrum_csv_impl<Rational>(s, fmt_q);
}

}  // namespace gapscope
