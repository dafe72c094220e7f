#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treelc/errors.hpp"
#include "treelc/prufer.hpp"

namespace treelc {

/// Unordered vertex pair stored with u < v.
struct EdgePair {
  Vertex u = 0;
  Vertex v = 0;

  EdgePair() = default;
  EdgePair(Vertex a, Vertex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend bool operator==(const EdgePair&, const EdgePair&) = default;
  friend auto operator<=>(const EdgePair&, const EdgePair&) = default;
};

/// A tree on vertices 1..n. Edges are kept sorted; adjacency lists are sorted.
class LabeledTree {
 public:
  LabeledTree() = default;

  /// Builds and validates: n-1 distinct in-range edges forming a connected graph.
  static LabeledTree from_edges(int n, std::vector<EdgePair> edges) {
    if (n < 2) throw StructureError("a tree needs at least 2 vertices");
    if (edges.size() != static_cast<std::size_t>(n - 1)) {
      throw StructureError("tree on " + std::to_string(n) + " vertices needs " + std::to_string(n - 1) +
                           " edges, got " + std::to_string(edges.size()));
    }
    for (const auto& e : edges) {
      if (e.u == e.v) throw StructureError("self-loop at vertex " + std::to_string(e.u));
      if (e.u < 1 || e.v > n) {
        throw StructureError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") out of range");
      }
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
      throw StructureError("duplicate edge");
    }
    LabeledTree t(n, std::move(edges));
    if (!t.connected()) throw StructureError("edge set is not connected (contains a cycle)");
    return t;
  }

  int n() const noexcept { return n_; }
  std::span<const EdgePair> edges() const noexcept { return edges_; }
  std::span<const Vertex> neighbors(Vertex v) const noexcept { return adjacency_[v]; }
  int degree(Vertex v) const noexcept { return static_cast<int>(adjacency_[v].size()); }

  bool has_edge(EdgePair e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

  /// Adjacency indexed by vertex label; entry 0 is unused.
  const std::vector<std::vector<Vertex>>& adjacency() const noexcept { return adjacency_; }

  friend bool operator==(const LabeledTree& a, const LabeledTree& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  LabeledTree(int n, std::vector<EdgePair> sorted_edges)
      : n_(n), edges_(std::move(sorted_edges)), adjacency_(static_cast<std::size_t>(n) + 1) {
    for (const auto& e : edges_) {
      adjacency_[e.u].push_back(e.v);
      adjacency_[e.v].push_back(e.u);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  }

  bool connected() const {
    std::vector<bool> seen(static_cast<std::size_t>(n_) + 1, false);
    std::vector<Vertex> stack{1};
    seen[1] = true;
    int count = 1;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (Vertex w : adjacency_[v]) {
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n_;
  }

  int n_ = 0;
  std::vector<EdgePair> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
};

/// Smallest-leaf-first Prüfer decoding: at step k the smallest remaining leaf
/// is joined to token k; the last two remaining vertices form the final edge.
inline LabeledTree decode(const PruferCode& code) {
  const int n = code.n();
  std::vector<int> degree(static_cast<std::size_t>(n) + 1, 1);
  for (Vertex t : code.tokens()) ++degree[t];

  std::priority_queue<Vertex, std::vector<Vertex>, std::greater<>> leaves;
  for (Vertex v = 1; v <= n; ++v) {
    if (degree[v] == 1) leaves.push(v);
  }
  std::vector<EdgePair> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (Vertex t : code.tokens()) {
    const Vertex leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, t);
    if (--degree[t] == 1) leaves.push(t);
  }
  const Vertex a = leaves.top();
  leaves.pop();
  const Vertex b = leaves.top();
  edges.emplace_back(a, b);
  return LabeledTree::from_edges(n, std::move(edges));
}

/// Inverse of decode: repeatedly remove the smallest leaf, emitting its neighbour.
inline PruferCode encode(const LabeledTree& tree) {
  const int n = tree.n();
  std::vector<int> degree(static_cast<std::size_t>(n) + 1);
  std::vector<bool> removed(static_cast<std::size_t>(n) + 1, false);
  std::priority_queue<Vertex, std::vector<Vertex>, std::greater<>> leaves;
  for (Vertex v = 1; v <= n; ++v) {
    degree[v] = tree.degree(v);
    if (degree[v] == 1) leaves.push(v);
  }
  std::vector<Vertex> tokens;
  tokens.reserve(static_cast<std::size_t>(std::max(n - 2, 0)));
  while (tokens.size() + 2 < static_cast<std::size_t>(n)) {
    const Vertex leaf = leaves.top();
    leaves.pop();
    removed[leaf] = true;
    for (Vertex w : tree.neighbors(leaf)) {
      if (removed[w]) continue;
      tokens.push_back(w);
      if (--degree[w] == 1) leaves.push(w);
      break;
    }
  }
  return PruferCode(n, std::move(tokens));
}

/// Validating encode from a raw edge list.
inline PruferCode encode(int n, std::vector<EdgePair> edges) {
  return encode(LabeledTree::from_edges(n, std::move(edges)));
}

/// All vertex pairs that are not tree edges, lexicographic.
inline std::vector<EdgePair> non_edges(const LabeledTree& tree) {
  const int n = tree.n();
  std::vector<EdgePair> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2 - (n - 1));
  for (Vertex u = 1; u <= n; ++u) {
    const auto nb = tree.neighbors(u);
    auto it = std::upper_bound(nb.begin(), nb.end(), u);
    for (Vertex v = u + 1; v <= n; ++v) {
      if (it != nb.end() && *it == v) {
        ++it;
        continue;
      }
      out.emplace_back(u, v);
    }
  }
  return out;
}

/// Vertices of the unique tree path from `from` to `to`, inclusive.
inline std::vector<Vertex> tree_path(const std::vector<std::vector<Vertex>>& adjacency, Vertex from, Vertex to) {
  std::vector<Vertex> parent(adjacency.size(), 0);
  std::vector<Vertex> stack{to};
  parent[to] = to;
  while (!stack.empty() && parent[from] == 0) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex w : adjacency[v]) {
      if (parent[w] == 0) {
        parent[w] = v;
        stack.push_back(w);
      }
    }
  }
  std::vector<Vertex> path{from};
  for (Vertex v = from; v != to; v = parent[v]) path.push_back(parent[v]);
  return path;
}

/// The cycle closed by non-edge e: e first, then the tree path from e.u to e.v.
inline std::vector<EdgePair> cycle_of(const LabeledTree& tree, EdgePair e) {
  if (e.u < 1 || e.v > tree.n() || e.u == e.v) throw PreconditionError("cycle_of: pair out of range");
  if (tree.has_edge(e)) throw PreconditionError("cycle_of: pair is already a tree edge");
  const auto path = tree_path(tree.adjacency(), e.u, e.v);
  std::vector<EdgePair> cycle{e};
  for (std::size_t i = 0; i + 1 < path.size(); ++i) cycle.emplace_back(path[i], path[i + 1]);
  return cycle;
}

/// Applies the edge swap (edges + add) - remove. add == remove is the identity.
inline LabeledTree swap_edge(const LabeledTree& tree, EdgePair add, EdgePair remove) {
  const auto cycle = cycle_of(tree, add);
  if (add == remove) return tree;
  if (std::find(cycle.begin(), cycle.end(), remove) == cycle.end()) {
    throw PreconditionError("swap_edge: removed edge is not on the cycle closed by the added edge");
  }
  std::vector<EdgePair> edges(tree.edges().begin(), tree.edges().end());
  std::erase(edges, remove);
  edges.push_back(add);
  return LabeledTree::from_edges(tree.n(), std::move(edges));
}

}  // namespace treelc
