#pragma once

#include <gmpxx.h>

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psm {

/// Exact arbitrary-precision rational. Results of arithmetic are always in
/// lowest terms with a positive denominator.
using Rational = mpq_class;

/// Raised for malformed instances, files and arguments.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "p/q" or a bare integer (optional sign on p). The result is
/// canonicalized, so "2/4" and "1/2" compare and print identically.
inline Rational parse_rational(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  const std::string s(text.substr(b, e - b));
  if (s.empty()) throw InputError("empty rational");

  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool digits = false, slash = false, den_digits = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      (slash ? den_digits : digits) = true;
    } else if (c == '/' && !slash && digits) {
      slash = true;
    } else {
      throw InputError("malformed rational '" + s + "'");
    }
  }
  if (!digits || (slash && !den_digits)) throw InputError("malformed rational '" + s + "'");

  Rational r;
  // mpq_set_str rejects a leading '+'.
  const std::string body = s[0] == '+' ? s.substr(1) : s;
  if (r.set_str(body, 10) != 0) throw InputError("malformed rational '" + s + "'");
  if (r.get_den() == 0) throw InputError("zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

/// Canonical "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline Rational rational(long num, long den = 1) {
  if (den == 0) throw InputError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace psm
