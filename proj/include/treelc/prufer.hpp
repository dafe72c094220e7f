#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <functional>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treelc/errors.hpp"

namespace treelc {

using Vertex = int;

/// A Prüfer code for a labeled tree on vertices 1..n: n-2 tokens, each in 1..n.
class PruferCode {
 public:
  PruferCode() = default;

  /// Validates length and token range; the error position is the token index.
  PruferCode(int n, std::vector<Vertex> tokens) : n_(n), tokens_(std::move(tokens)) {
    if (n_ < 2) throw ValidationError("vertex count must be at least 2, got " + std::to_string(n_));
    if (tokens_.size() != static_cast<std::size_t>(n_ - 2)) {
      throw ValidationError("code for n=" + std::to_string(n_) + " must have " + std::to_string(n_ - 2) +
                                " tokens, got " + std::to_string(tokens_.size()),
                            std::min(tokens_.size(), static_cast<std::size_t>(n_ - 2)));
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i] < 1 || tokens_[i] > n_) {
        throw ValidationError("token " + std::to_string(tokens_[i]) + " at position " + std::to_string(i) +
                                  " is outside 1.." + std::to_string(n_),
                              i);
      }
    }
  }

  /// Vertex count is inferred as tokens.size() + 2.
  static PruferCode from_tokens(std::vector<Vertex> tokens) {
    const int n = static_cast<int>(tokens.size()) + 2;
    return PruferCode(n, std::move(tokens));
  }

  /// The code of the star centred at `center`.
  static PruferCode star(int n, Vertex center = 1) {
    return PruferCode(n, std::vector<Vertex>(static_cast<std::size_t>(std::max(n - 2, 0)), center));
  }

  int n() const noexcept { return n_; }
  std::span<const Vertex> tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  friend bool operator==(const PruferCode&, const PruferCode&) = default;
  friend std::strong_ordering operator<=>(const PruferCode& a, const PruferCode& b) {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    return a.tokens_ <=> b.tokens_;
  }

 private:
  int n_ = 2;
  std::vector<Vertex> tokens_;
};

/// No repeated token. n <= 3 codes are vacuously paths.
inline bool is_path(const PruferCode& code) {
  std::vector<bool> seen(static_cast<std::size_t>(code.n()) + 1, false);
  for (Vertex t : code.tokens()) {
    if (seen[t]) return false;
    seen[t] = true;
  }
  return true;
}

/// All tokens equal. n <= 3 codes are vacuously stars.
inline bool is_star(const PruferCode& code) {
  const auto t = code.tokens();
  return std::adjacent_find(t.begin(), t.end(), std::not_equal_to<>{}) == t.end();
}

// ---------------------------------------------------------------------------
// Code text format: one code per line, base-10 tokens separated by single
// spaces. Empty lines are skipped.

inline std::string format_code(const PruferCode& code) {
  std::string out;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(code.tokens()[i]);
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const PruferCode& code) { return os << format_code(code); }

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && first != last;
}

}  // namespace detail

/// Strict parse of one line for a run-level vertex count n.
inline PruferCode parse_code_line(std::string_view line, int n) {
  std::vector<Vertex> tokens;
  if (!line.empty()) {
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(' ', start);
      const auto field = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
      int value = 0;
      if (!detail::parse_int(field, value)) {
        throw ValidationError("token " + std::to_string(tokens.size()) + " is not an integer: '" +
                                  std::string(field) + "'",
                              tokens.size());
      }
      tokens.push_back(value);
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
  }
  return PruferCode(n, std::move(tokens));
}

/// Lenient parse used for raw generator emissions: any whitespace separates
/// tokens. Returns false instead of throwing.
inline bool try_parse_code(std::string_view raw, int n, PruferCode& out) {
  std::vector<Vertex> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (i == raw.size()) break;
    std::size_t j = i;
    while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
    int value = 0;
    if (!detail::parse_int(raw.substr(i, j - i), value)) return false;
    if (value < 1 || value > n) return false;
    tokens.push_back(value);
    if (tokens.size() > static_cast<std::size_t>(std::max(n - 2, 0))) return false;
    i = j;
  }
  if (n < 2 || tokens.size() != static_cast<std::size_t>(n - 2)) return false;
  out = PruferCode(n, std::move(tokens));
  return true;
}

/// Reads a whole code file. Errors carry the 1-based line number.
inline std::vector<PruferCode> read_codes(std::istream& in, int n) {
  std::vector<PruferCode> codes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      codes.push_back(parse_code_line(line, n));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return codes;
}

inline void write_codes(std::ostream& out, std::span<const PruferCode> codes) {
  for (const auto& c : codes) out << format_code(c) << '\n';
}

}  // namespace treelc
