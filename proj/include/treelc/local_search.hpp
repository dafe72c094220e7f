#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "treelc/errors.hpp"
#include "treelc/independence.hpp"
#include "treelc/prufer.hpp"
#include "treelc/random.hpp"
#include "treelc/tree.hpp"

namespace treelc {

/// Order in which the frozen non-edge list is scanned.
enum class EdgeOrder {
  Sorted,    ///< decreasing endpoint degree sum, ties lexicographic
  Unsorted,  ///< lexicographic
  Random,    ///< seeded uniform shuffle
};

struct SearchConfig {
  IndexMode index_mode = IndexMode::Half;
  int k = 1;
  int max_swaps = 10;
  EdgeOrder edge_order = EdgeOrder::Sorted;
  bool punish_path = false;
  std::uint64_t rng_seed = 0;
  /// Extension point: candidates for which this returns true are never
  /// adopted (they are still recorded if positive). Empty by default.
  std::function<bool(const LabeledTree&, const Score&)> reject_candidate;

  void validate() const {
    if (max_swaps < 0) throw ConfigError("max_swaps must be >= 0");
    if (index_mode == IndexMode::AlphaMinusK && k < 1) throw ConfigError("alpha-k mode needs k >= 1");
  }
};

struct SearchResult {
  PruferCode final_code;
  Score final_score;
  int swaps_performed = 0;
  bool early_exit = false;
  /// Every distinct positively scored tree met during the search, in order of
  /// first encounter (includes the input when it early-exits).
  std::vector<std::pair<PruferCode, Score>> visited_positive;
};

/// Number of non-edges of any tree on n vertices; the "maximum swaps" budget.
constexpr int full_swap_budget(int n) noexcept { return n * (n - 1) / 2 - (n - 1); }

inline std::string_view edge_order_name(EdgeOrder o) {
  switch (o) {
    case EdgeOrder::Sorted:
      return "sorted";
    case EdgeOrder::Unsorted:
      return "unsorted";
    case EdgeOrder::Random:
      return "random";
  }
  return "?";
}

inline EdgeOrder parse_edge_order(std::string_view s) {
  if (s == "sorted" || s == "1") return EdgeOrder::Sorted;
  if (s == "unsorted" || s == "0") return EdgeOrder::Unsorted;
  if (s == "random" || s == "-1") return EdgeOrder::Random;
  throw ValidationError("unknown edge order '" + std::string(s) + "' (expected sorted, unsorted, random)");
}

/// The non-edge list of `tree` in scan order for `order`.
inline std::vector<EdgePair> ordered_non_edges(const LabeledTree& tree, EdgeOrder order, std::uint64_t seed) {
  auto list = non_edges(tree);
  switch (order) {
    case EdgeOrder::Unsorted:
      break;
    case EdgeOrder::Sorted:
      std::stable_sort(list.begin(), list.end(), [&](const EdgePair& a, const EdgePair& b) {
        return tree.degree(a.u) + tree.degree(a.v) > tree.degree(b.u) + tree.degree(b.v);
      });
      break;
    case EdgeOrder::Random: {
      Rng rng(seed);
      shuffle(std::span<EdgePair>(list), rng);
      break;
    }
  }
  return list;
}

namespace detail {

/// Mutable working tree plus a scoring kernel of coefficient type Coeff.
template <typename Coeff>
class SwapSearch {
  using Wide = typename ScoreTraits<Coeff>::Wide;

 public:
  SwapSearch(const SearchConfig& config, int n)
      : config_(config), n_(n), adjacency_(static_cast<std::size_t>(n) + 1),
        matrix_(static_cast<std::size_t>(n + 1) * (n + 1), 0) {
    if (config_.index_mode != IndexMode::AlphaMinusK) fixed_index_ = target_index(n, config_.index_mode, config_.k, 0);
  }

  SearchResult run(const PruferCode& code) {
    SearchResult result;
    load(decode(code));
    int index = 0;
    Wide current = score(index);
    if (current > 0) {
      result.final_code = code;
      result.final_score = make_score(current, index);
      result.early_exit = true;
      result.visited_positive.emplace_back(code, result.final_score);
      return result;
    }

    if (config_.punish_path && is_path(code)) {
      load(decode(PruferCode::star(n_, 1)));
      current = score(index);
    }

    const auto list = ordered_non_edges(snapshot(), config_.edge_order, config_.rng_seed);
    for (const EdgePair& e : list) {
      if (result.swaps_performed >= config_.max_swaps) break;
      if (has_edge(e)) continue;
      const auto path = tree_path(adjacency_, e.u, e.v);
      add(e);
      Wide best = current;
      int best_index = index;
      std::size_t best_pos = path.size();
      for (std::size_t j = 0; j + 1 < path.size(); ++j) {
        const EdgePair f(path[j], path[j + 1]);
        remove(f);
        int candidate_index = 0;
        const Wide s = score(candidate_index);
        if (s > 0 || (s > best && config_.reject_candidate)) {
          const auto tree = snapshot();
          const Score sc = make_score(s, candidate_index);
          if (s > 0) record(result, encode(tree), sc);
          if (s > best && !(config_.reject_candidate && config_.reject_candidate(tree, sc))) {
            best = s;
            best_index = candidate_index;
            best_pos = j;
          }
        } else if (s > best) {
          best = s;
          best_index = candidate_index;
          best_pos = j;
        }
        add(f);
      }
      if (best_pos < path.size()) {
        remove(EdgePair(path[best_pos], path[best_pos + 1]));
        current = best;
        index = best_index;
        ++result.swaps_performed;
      } else {
        remove(e);
      }
    }

    result.final_code = encode(snapshot());
    result.final_score = make_score(current, index);
    return result;
  }

 private:
  void load(const LabeledTree& tree) {
    std::fill(matrix_.begin(), matrix_.end(), 0);
    for (Vertex v = 0; v <= n_; ++v) adjacency_[v].clear();
    for (const auto& e : tree.edges()) add(e);
  }

  bool has_edge(EdgePair e) const { return matrix_[static_cast<std::size_t>(e.u) * (n_ + 1) + e.v] != 0; }

  void add(EdgePair e) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
    matrix_[static_cast<std::size_t>(e.u) * (n_ + 1) + e.v] = 1;
  }

  void remove(EdgePair e) {
    std::erase(adjacency_[e.u], e.v);
    std::erase(adjacency_[e.v], e.u);
    matrix_[static_cast<std::size_t>(e.u) * (n_ + 1) + e.v] = 0;
  }

  LabeledTree snapshot() const {
    std::vector<EdgePair> edges;
    edges.reserve(static_cast<std::size_t>(n_ - 1));
    for (Vertex u = 1; u <= n_; ++u) {
      for (Vertex v : adjacency_[u]) {
        if (u < v) edges.emplace_back(u, v);
      }
    }
    return LabeledTree::from_edges(n_, std::move(edges));
  }

  Wide score(int& index) {
    if (fixed_index_ > 0) {
      index = fixed_index_;
      return score_from<Coeff>(kernel_.compute(adjacency_, n_, fixed_index_ + 1), fixed_index_);
    }
    const auto coeffs = kernel_.compute(adjacency_, n_, n_);
    index = target_index(n_, config_.index_mode, config_.k, static_cast<int>(coeffs.size()) - 1);
    return score_from<Coeff>(coeffs, index);
  }

  Score make_score(const Wide& value, int index) const { return Score{widen(value), index, n_ / 2 - index}; }

  void record(SearchResult& result, PruferCode code, const Score& s) {
    if (seen_.insert(code).second) result.visited_positive.emplace_back(std::move(code), s);
  }

  const SearchConfig& config_;
  int n_;
  int fixed_index_ = 0;
  std::vector<std::vector<Vertex>> adjacency_;
  std::vector<std::uint8_t> matrix_;
  IndependenceKernel<Coeff> kernel_;
  std::set<PruferCode> seen_;
};

}  // namespace detail

/// Edge-swap hill climb over a non-edge list frozen at the start.
///
/// Early exit if the input already scores positive. With punish_path a path
/// input is replaced by the star with centre 1 before the list is built. Each
/// listed non-edge that is still absent closes a cycle; every single-edge
/// deletion along it is scored and the strict maximum adopted, the current
/// tree winning ties and earlier cycle edges winning among candidates.
inline SearchResult optimize(const PruferCode& code, const SearchConfig& config) {
  config.validate();
  return detail::with_kernel_type(code.n(), [&]<typename Coeff>() {
    detail::SwapSearch<Coeff> search(config, code.n());
    return search.run(code);
  });
}

/// optimize() over a batch, fanned out over `threads` workers (0 = hardware
/// concurrency). Item i uses seed derive_seed(config.rng_seed, i), so results
/// do not depend on the thread count.
inline std::vector<SearchResult> batch_optimize(std::span<const PruferCode> codes, const SearchConfig& config,
                                                std::size_t threads = 0) {
  config.validate();
  if (codes.empty()) return {};
  const int n = codes.front().n();
  for (const auto& c : codes) {
    if (c.n() != n) throw ValidationError("batch mixes vertex counts " + std::to_string(n) + " and " +
                                          std::to_string(c.n()));
  }
  std::vector<SearchResult> results(codes.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, codes.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < codes.size(); i = next++) {
        SearchConfig item = config;
        item.rng_seed = derive_seed(config.rng_seed, i);
        results[i] = optimize(codes[i], item);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = codes.size();
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace treelc
