#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "treelc/bigint.hpp"
#include "treelc/errors.hpp"
#include "treelc/tree.hpp"

namespace treelc {

/// Coefficients a_0..a_alpha of the independence polynomial of a tree.
struct IndependenceSequence {
  int n = 0;
  std::vector<BigInt> coeffs;

  int alpha() const noexcept { return static_cast<int>(coeffs.size()) - 1; }

  /// a_j, reading 0 outside 0..alpha.
  BigInt at(int j) const { return j < 0 || j > alpha() ? BigInt(0) : coeffs[static_cast<std::size_t>(j)]; }

  BigInt total() const {
    BigInt s = 0;
    for (const auto& c : coeffs) s += c;
    return s;
  }

  friend bool operator==(const IndependenceSequence&, const IndependenceSequence&) = default;
};

enum class IndexMode { Half, HalfMinusOne, AlphaMinusK };

/// Log-concavity defect a_{i-1} a_{i+1} - a_i^2 at `index`; positive means breakage.
struct Score {
  BigInt value;
  int index = 0;
  /// floor(n/2) - index.
  int beta = 0;

  bool positive() const { return value > 0; }

  friend bool operator==(const Score&, const Score&) = default;
};

namespace detail {

template <typename Coeff>
struct ScoreTraits {
  using Wide = BigInt;
};
template <>
struct ScoreTraits<std::uint64_t> {
  using Wide = __int128;
};

template <typename Coeff>
inline BigInt to_big(const Coeff& c) {
  return BigInt(c);
}

/// Rooted two-state tree DP with preallocated buffers. For each vertex v:
/// f0(v) = prod over children (f0(c) + f1(c)) and f1(v) = x * prod f0(c);
/// I_T = f0(root) + f1(root). Polynomials are truncated above `max_degree`,
/// which leaves the low coefficients exact.
///
/// Coeff must hold 2^(n-1)+1 (the largest possible number of independent sets
/// of an n-vertex tree); select_kernel picks the narrowest such type.
template <typename Coeff>
class IndependenceKernel {
 public:
  std::span<const Coeff> compute(const std::vector<std::vector<Vertex>>& adjacency, int n, int max_degree,
                                 Vertex root = 1) {
    const int limit = std::clamp(max_degree, 0, n);
    stride_ = static_cast<std::size_t>(limit) + 1;
    const auto slots = static_cast<std::size_t>(n + 1);
    if (parent_.size() < slots) {
      parent_.resize(slots);
      len0_.resize(slots);
      len1_.resize(slots);
    }
    if (f0_.size() < slots * stride_) {
      f0_.resize(slots * stride_);
      f1_.resize(slots * stride_);
    }
    if (tmp_.size() < 2 * stride_) tmp_.resize(2 * stride_);

    order_.clear();
    order_.push_back(root);
    std::fill(parent_.begin(), parent_.begin() + static_cast<std::ptrdiff_t>(slots), Vertex{0});
    parent_[root] = root;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const Vertex v = order_[i];
      for (Vertex w : adjacency[v]) {
        if (parent_[w] == 0) {
          parent_[w] = v;
          order_.push_back(w);
        }
      }
    }

    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const Vertex v = *it;
      Coeff* a = poly0(v);  // product of (f0 + f1) over children
      Coeff* g = poly1(v);  // product of f0 over children, shifted by x at the end
      a[0] = Coeff(1);
      g[0] = Coeff(1);
      std::size_t la = 1;
      std::size_t lg = 1;
      for (Vertex c : adjacency[v]) {
        if (c == parent_[v]) continue;
        const Coeff* c0 = poly0(c);
        const Coeff* c1 = poly1(c);
        const std::size_t l0 = len0_[c];
        const std::size_t l1 = len1_[c];
        // sum = f0(c) + f1(c)
        Coeff* sum = tmp_.data() + stride_;
        const std::size_t ls = std::max(l0, l1);
        for (std::size_t j = 0; j < ls; ++j) {
          sum[j] = (j < l0 ? c0[j] : Coeff(0)) + (j < l1 ? c1[j] : Coeff(0));
        }
        la = multiply_into(a, la, sum, ls);
        lg = multiply_into(g, lg, c0, l0);
      }
      len0_[v] = la;
      // f1 = x * g, truncated.
      const std::size_t l1 = std::min(lg + 1, stride_);
      for (std::size_t j = l1; j-- > 1;) g[j] = g[j - 1];
      g[0] = Coeff(0);
      len1_[v] = l1;
    }

    result_.resize(std::max(len0_[root], len1_[root]));
    const Coeff* r0 = poly0(root);
    const Coeff* r1 = poly1(root);
    for (std::size_t j = 0; j < result_.size(); ++j) {
      result_[j] = (j < len0_[root] ? r0[j] : Coeff(0)) + (j < len1_[root] ? r1[j] : Coeff(0));
    }
    return result_;
  }

 private:
  Coeff* poly0(Vertex v) { return f0_.data() + static_cast<std::size_t>(v) * stride_; }
  Coeff* poly1(Vertex v) { return f1_.data() + static_cast<std::size_t>(v) * stride_; }

  /// acc <- acc * other, truncated to stride_ coefficients; returns new length.
  std::size_t multiply_into(Coeff* acc, std::size_t la, const Coeff* other, std::size_t lo) {
    const std::size_t lr = std::min(la + lo - 1, stride_);
    Coeff* out = tmp_.data();
    for (std::size_t j = 0; j < lr; ++j) out[j] = Coeff(0);
    for (std::size_t i = 0; i < la; ++i) {
      if (acc[i] == 0) continue;
      const std::size_t jmax = std::min(lo, lr - i);
      for (std::size_t j = 0; j < jmax; ++j) out[i + j] += acc[i] * other[j];
    }
    std::copy(out, out + lr, acc);
    return lr;
  }

  std::size_t stride_ = 1;
  std::vector<Vertex> order_;
  std::vector<Vertex> parent_;
  std::vector<std::size_t> len0_;
  std::vector<std::size_t> len1_;
  std::vector<Coeff> f0_;
  std::vector<Coeff> f1_;
  std::vector<Coeff> tmp_;
  std::vector<Coeff> result_;
};

/// a_{i-1} a_{i+1} - a_i^2 over (possibly truncated) coefficients; entries past
/// the end read as 0.
template <typename Coeff>
typename ScoreTraits<Coeff>::Wide score_from(std::span<const Coeff> a, int i) {
  using Wide = typename ScoreTraits<Coeff>::Wide;
  auto get = [&](int j) -> Wide {
    return j >= 0 && static_cast<std::size_t>(j) < a.size() ? Wide(a[static_cast<std::size_t>(j)]) : Wide(0);
  };
  const Wide mid = get(i);
  return get(i - 1) * get(i + 1) - mid * mid;
}

inline BigInt widen(const BigInt& v) { return v; }
inline BigInt widen(__int128 v) { return BigInt(v); }

/// Dispatches f<Coeff>() to the narrowest coefficient type that is exact for n.
template <typename F>
decltype(auto) with_kernel_type(int n, F&& f) {
  if (n <= 63) return f.template operator()<std::uint64_t>();
  if (n <= 127) return f.template operator()<unsigned __int128>();
  return f.template operator()<BigInt>();
}

}  // namespace detail

/// Exact independence polynomial via the rooted DP, rooted at vertex 1.
inline IndependenceSequence independence_sequence(const LabeledTree& tree) {
  IndependenceSequence seq;
  seq.n = tree.n();
  detail::with_kernel_type(tree.n(), [&]<typename Coeff>() {
    detail::IndependenceKernel<Coeff> kernel;
    const auto coeffs = kernel.compute(tree.adjacency(), tree.n(), tree.n());
    seq.coeffs.reserve(coeffs.size());
    for (const auto& c : coeffs) seq.coeffs.push_back(detail::to_big(c));
  });
  return seq;
}

inline int independence_number(const IndependenceSequence& seq) noexcept { return seq.alpha(); }

inline Score score_at(const IndependenceSequence& seq, int i) {
  if (i <= 0) throw ValidationError("score index must be >= 1, got " + std::to_string(i));
  return Score{seq.at(i - 1) * seq.at(i + 1) - seq.at(i) * seq.at(i), i, seq.n / 2 - i};
}

/// Index for a mode given n and (for AlphaMinusK) the tree's independence number.
inline int target_index(int n, IndexMode mode, int k, int alpha) {
  int index = 0;
  switch (mode) {
    case IndexMode::Half:
      index = n / 2;
      break;
    case IndexMode::HalfMinusOne:
      index = n / 2 - 1;
      break;
    case IndexMode::AlphaMinusK:
      if (k < 1) throw ValidationError("alpha-k mode needs k >= 1, got " + std::to_string(k));
      index = alpha - k;
      break;
  }
  if (index < 1) throw ValidationError("target index " + std::to_string(index) + " is below 1");
  return index;
}

inline int target_index(const IndependenceSequence& seq, IndexMode mode, int k) {
  return target_index(seq.n, mode, k, seq.alpha());
}

/// Runtime check of alpha >= floor(n/2) + beta + 1 for a counterexample at
/// index i = floor(n/2) - beta. A false result is a finding, not a bug.
inline bool check_alpha_conjecture(const IndependenceSequence& seq, int i) {
  const int half = seq.n / 2;
  const int beta = half - i;
  return seq.alpha() >= half + beta + 1;
}

/// Independence number by greedy leaf selection (a leaf is always in some
/// maximum independent set). Independent of the polynomial DP.
inline int max_independent_set_size(const LabeledTree& tree) {
  const int n = tree.n();
  std::vector<int> degree(static_cast<std::size_t>(n) + 1);
  std::vector<bool> gone(static_cast<std::size_t>(n) + 1, false);
  std::vector<Vertex> leaves;
  for (Vertex v = 1; v <= n; ++v) {
    degree[v] = tree.degree(v);
    if (degree[v] <= 1) leaves.push_back(v);
  }
  int size = 0;
  auto erase = [&](Vertex v) {
    gone[v] = true;
    for (Vertex w : tree.neighbors(v)) {
      if (!gone[w] && --degree[w] <= 1) leaves.push_back(w);
    }
  };
  while (!leaves.empty()) {
    const Vertex leaf = leaves.back();
    leaves.pop_back();
    if (gone[leaf]) continue;
    ++size;
    gone[leaf] = true;
    for (Vertex w : tree.neighbors(leaf)) {
      if (!gone[w]) erase(w);
    }
  }
  return size;
}

// Sequence serialization: comma-separated base-10, lowest degree first.

inline std::string format_sequence(const IndependenceSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.coeffs.size(); ++i) {
    if (i) out.push_back(',');
    out += to_decimal(seq.coeffs[i]);
  }
  return out;
}

inline std::vector<BigInt> parse_sequence(std::string_view text) {
  std::vector<BigInt> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(',', start);
    const auto field = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    out.push_back(parse_decimal(field));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::string_view index_mode_name(IndexMode mode) {
  switch (mode) {
    case IndexMode::Half:
      return "half";
    case IndexMode::HalfMinusOne:
      return "half-1";
    case IndexMode::AlphaMinusK:
      return "alpha-k";
  }
  return "?";
}

inline IndexMode parse_index_mode(std::string_view s) {
  if (s == "half") return IndexMode::Half;
  if (s == "half-1") return IndexMode::HalfMinusOne;
  if (s == "alpha-k") return IndexMode::AlphaMinusK;
  throw ValidationError("unknown index mode '" + std::string(s) + "' (expected half, half-1, alpha-k)");
}

}  // namespace treelc
