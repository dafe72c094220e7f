#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

#include "treelc/errors.hpp"

namespace treelc {

using BigInt = boost::multiprecision::cpp_int;

inline std::string to_decimal(const BigInt& v) { return v.str(); }

/// Parses an optionally signed base-10 integer; rejects anything else.
inline BigInt parse_decimal(std::string_view text) {
  std::size_t i = 0;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) i = 1;
  if (i == text.size()) throw ValidationError("empty integer");
  for (std::size_t j = i; j < text.size(); ++j) {
    if (text[j] < '0' || text[j] > '9') {
      throw ValidationError("not a base-10 integer: '" + std::string(text) + "'", j);
    }
  }
  BigInt v(std::string(text.substr(i)));
  return text[0] == '-' ? BigInt(-v) : v;
}

}  // namespace treelc
