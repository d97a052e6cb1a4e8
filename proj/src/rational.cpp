#include "gapscope/rational.hpp"

#include <cctype>
#include <sstream>

namespace gapscope {

namespace {

bool valid_integer_text(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s = text;
  // strip surrounding whitespace
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw std::invalid_argument("parse_rational: empty input");

  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (!valid_integer_text(num) || !valid_integer_text(den))
      throw std::invalid_argument("parse_rational: malformed fraction '" + text + "'");
    Integer n(num), d(den);
    if (d == 0) throw std::invalid_argument("parse_rational: zero denominator in '" + text + "'");
    Rational q(n, d);
    q.canonicalize();
    return q;
  }

  const auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string head = s.substr(0, dot);
    std::string tail = s.substr(dot + 1);
    bool neg = false;
    if (!head.empty() && (head[0] == '-' || head[0] == '+')) {
      neg = head[0] == '-';
      head.erase(head.begin());
    }
    if (head.empty()) head = "0";
    if (tail.empty()) tail = "0";
    if (!valid_integer_text(head) || !valid_integer_text(tail))
      throw std::invalid_argument("parse_rational: malformed decimal '" + text + "'");
    Integer ip(head), fp(tail);
    Integer scale = 1;
    for (std::size_t i = 0; i < tail.size(); ++i) scale *= 10;
    Integer num = ip * scale + fp;
    if (neg) num = -num;
    Rational q(num, scale);
    q.canonicalize();
    return q;
  }

  if (!valid_integer_text(s))
    throw std::invalid_argument("parse_rational: malformed number '" + text + "'");
  return Rational(Integer(s));
}

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Integer rational_floor(const Rational& x) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return f;
}

Rational mod_interval(const Rational& x, const Rational& m) {
  if (m <= 0) throw std::invalid_argument("mod_interval: modulus must be positive");
  Rational ratio = x / m;
  Rational r = x - Rational(rational_floor(ratio)) * m;
  // guard against the exact-boundary case
  if (r >= m) r -= m;
  if (r < 0) r += m;
  return r;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  if (out.empty()) throw std::invalid_argument("parse_rational_list: empty list");
  return out;
}

}  // namespace gapscope
