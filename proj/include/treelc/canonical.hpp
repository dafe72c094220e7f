#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "treelc/errors.hpp"
#include "treelc/tree.hpp"

namespace treelc {

/// The one or two centres of a tree (vertices of minimum eccentricity),
/// found by peeling leaves layer by layer.
inline std::vector<Vertex> tree_centers(const LabeledTree& tree) {
  const int n = tree.n();
  if (n <= 2) {
    std::vector<Vertex> all;
    for (Vertex v = 1; v <= n; ++v) all.push_back(v);
    return all;
  }
  std::vector<int> degree(static_cast<std::size_t>(n) + 1);
  std::vector<Vertex> layer;
  for (Vertex v = 1; v <= n; ++v) {
    degree[v] = tree.degree(v);
    if (degree[v] == 1) layer.push_back(v);
  }
  int remaining = n;
  while (remaining > 2) {
    remaining -= static_cast<int>(layer.size());
    std::vector<Vertex> next;
    for (Vertex leaf : layer) {
      for (Vertex w : tree.neighbors(leaf)) {
        if (--degree[w] == 1) next.push_back(w);
      }
    }
    layer = std::move(next);
  }
  std::sort(layer.begin(), layer.end());
  return layer;
}

namespace detail {

/// AHU string of the subtree at `root`: "(" + sorted child strings + ")".
inline std::string ahu_encoding(const LabeledTree& tree, Vertex root) {
  const int n = tree.n();
  std::vector<Vertex> parent(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Vertex> order;
  order.reserve(static_cast<std::size_t>(n));
  order.push_back(root);
  parent[root] = root;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (Vertex w : tree.neighbors(order[i])) {
      if (parent[w] == 0) {
        parent[w] = order[i];
        order.push_back(w);
      }
    }
  }
  std::vector<std::vector<std::string>> child_codes(static_cast<std::size_t>(n) + 1);
  std::string result;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& kids = child_codes[*it];
    std::sort(kids.begin(), kids.end());
    std::string code = "(";
    for (auto& k : kids) code += k;
    code += ')';
    kids.clear();
    kids.shrink_to_fit();
    if (*it == root) {
      result = std::move(code);
    } else {
      child_codes[parent[*it]].push_back(std::move(code));
    }
  }
  return result;
}

}  // namespace detail

/// Label-invariant canonical string: AHU encoding rooted at the centre, or the
/// lexicographically smaller of the two encodings for bicentral trees. Two
/// trees have equal forms iff they are isomorphic.
inline std::string canonical_form(const LabeledTree& tree) {
  const auto centers = tree_centers(tree);
  std::string best = detail::ahu_encoding(tree, centers.front());
  for (std::size_t i = 1; i < centers.size(); ++i) {
    best = std::min(best, detail::ahu_encoding(tree, centers[i]));
  }
  return best;
}

/// Packs a canonical form into hex, one bit per parenthesis ('(' = 1), MSB
/// first, zero-padded to a whole nibble. Lossless for a fixed n, so it can
/// serve as an exact isomorphism-class key in text artifacts.
inline std::string canonical_hash(std::string_view form) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve((form.size() + 3) / 4);
  for (std::size_t i = 0; i < form.size(); i += 4) {
    int nibble = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < form.size() && form[i + j] == '(') nibble |= 1;
    }
    out.push_back(digits[nibble]);
  }
  return out;
}

inline std::string canonical_hash(const LabeledTree& tree) { return canonical_hash(canonical_form(tree)); }

}  // namespace treelc
