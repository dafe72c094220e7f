#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "treelc/bigint.hpp"
#include "treelc/errors.hpp"
#include "treelc/independence.hpp"
#include "treelc/ledger.hpp"
#include "treelc/prufer.hpp"
#include "treelc/tree.hpp"

namespace treelc {

enum class HistogramScale { Linear, SignedLog };
enum class HistogramPopulation { TopKScores, SampleAlphas };

struct HistogramSpec {
  int bucket_count = 20;
  HistogramScale scale = HistogramScale::SignedLog;
  HistogramPopulation population = HistogramPopulation::TopKScores;
};

struct HistogramBucket {
  std::string low;
  std::string high;
  std::size_t count = 0;
};

struct Histogram {
  std::vector<HistogramBucket> buckets;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& b : buckets) s += b.count;
    return s;
  }

  std::string to_csv() const {
    std::string out = "bucket_low,bucket_high,count\n";
    for (const auto& b : buckets) out += b.low + ',' + b.high + ',' + std::to_string(b.count) + '\n';
    return out;
  }
};

/// sign(v) * log10(1 + |v|).
inline double signed_log10(const BigInt& v) {
  if (v == 0) return 0.0;
  const BigInt mag = abs(v);
  const double m = mag.convert_to<double>();
  const double t = std::log10(1.0 + m);
  return v < 0 ? -t : t;
}

namespace detail {

inline BigInt ceil_div(const BigInt& a, const BigInt& b) { return (a + b - 1) / b; }

inline std::string format_edge(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << x;
  return os.str();
}

}  // namespace detail

/// Buckets exact scores. LINEAR buckets are integer ranges with inclusive
/// bounds; SIGNED_LOG buckets are equal-width in signed_log10 units (edges are
/// printed in those units). A population with a single distinct value yields
/// one bucket.
inline Histogram score_histogram(std::span<const BigInt> values, const HistogramSpec& spec) {
  if (values.empty()) throw ValidationError("histogram of an empty population");
  if (spec.bucket_count < 1) throw ValidationError("bucket count must be >= 1");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const BigInt lo = *min_it;
  const BigInt hi = *max_it;
  const int b = lo == hi ? 1 : spec.bucket_count;
  Histogram h;
  h.buckets.resize(static_cast<std::size_t>(b));

  if (spec.scale == HistogramScale::Linear) {
    const BigInt range = hi - lo;
    for (int j = 0; j < b; ++j) {
      auto& bucket = h.buckets[static_cast<std::size_t>(j)];
      if (range == 0) {
        bucket.low = bucket.high = to_decimal(lo);
        continue;
      }
      bucket.low = to_decimal(lo + detail::ceil_div(range * j, BigInt(b)));
      bucket.high = j + 1 == b ? to_decimal(hi) : to_decimal(lo + detail::ceil_div(range * (j + 1), BigInt(b)) - 1);
    }
    for (const auto& v : values) {
      std::size_t idx = 0;
      if (range != 0) {
        const BigInt q = (v - lo) * b / range;
        idx = static_cast<std::size_t>(std::min<BigInt>(q, BigInt(b - 1)).convert_to<long long>());
      }
      ++h.buckets[idx].count;
    }
    return h;
  }

  const double tlo = signed_log10(lo);
  const double thi = signed_log10(hi);
  const double width = (thi - tlo) / b;
  for (int j = 0; j < b; ++j) {
    auto& bucket = h.buckets[static_cast<std::size_t>(j)];
    bucket.low = detail::format_edge(tlo + width * j);
    bucket.high = detail::format_edge(j + 1 == b ? thi : tlo + width * (j + 1));
  }
  for (const auto& v : values) {
    std::size_t idx = 0;
    if (width > 0.0) {
      const double pos = std::floor((signed_log10(v) - tlo) / width);
      idx = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(b - 1)));
    }
    ++h.buckets[idx].count;
  }
  return h;
}

inline Histogram score_histogram(std::span<const Score> scores, const HistogramSpec& spec) {
  std::vector<BigInt> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.value);
  return score_histogram(std::span<const BigInt>(values), spec);
}

struct AlphaDistribution {
  int n = 0;
  std::map<int, std::size_t> counts;
  std::size_t total = 0;
  double mean = 0.0;

  /// 0.57 n, the asymptotic mean for uniform random labeled trees.
  double reference() const noexcept { return 0.57 * n; }

  Histogram histogram() const {
    Histogram h;
    for (const auto& [alpha, count] : counts) h.buckets.push_back({std::to_string(alpha), std::to_string(alpha), count});
    return h;
  }
};

/// Exact alpha distribution over `codes`. Each alpha from the polynomial DP is
/// re-checked against greedy leaf matching; a disagreement throws.
inline AlphaDistribution alpha_distribution(std::span<const PruferCode> codes) {
  AlphaDistribution d;
  if (codes.empty()) return d;
  d.n = codes.front().n();
  double sum = 0.0;
  for (const auto& code : codes) {
    if (code.n() != d.n) throw ValidationError("alpha_distribution over mixed vertex counts");
    const auto tree = decode(code);
    const int alpha = independence_sequence(tree).alpha();
    if (alpha != max_independent_set_size(tree)) {
      throw RuntimeFailure("independence number cross-check failed for code " + format_code(code));
    }
    ++d.counts[alpha];
    sum += alpha;
  }
  d.total = codes.size();
  d.mean = sum / static_cast<double>(d.total);
  return d;
}

/// `# n=<n> score=<s> index=<i>` followed by `u v` lines.
inline void write_edge_list(std::ostream& out, const CounterexampleRecord& r) {
  out << "# n=" << r.n() << " score=" << to_decimal(r.score.value) << " index=" << r.score.index << '\n';
  const auto tree = decode(r.code);
  for (const auto& e : tree.edges()) out << e.u << ' ' << e.v << '\n';
}

struct EdgeListBlock {
  int n = 0;
  std::string score;
  int index = 0;
  std::vector<EdgePair> edges;
};

/// Reads the blocks written by write_edge_list. A block ends at the first
/// line that is not a `u v` pair; lines outside blocks are ignored.
inline std::vector<EdgeListBlock> read_edge_lists(std::istream& in) {
  std::vector<EdgeListBlock> blocks;
  std::string line;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.rfind("# n=", 0) == 0) {
      EdgeListBlock b;
      std::istringstream header(line.substr(2));
      std::string field;
      while (header >> field) {
        if (field.rfind("n=", 0) == 0) b.n = std::stoi(field.substr(2));
        if (field.rfind("score=", 0) == 0) b.score = field.substr(6);
        if (field.rfind("index=", 0) == 0) b.index = std::stoi(field.substr(6));
      }
      blocks.push_back(std::move(b));
      open = true;
      continue;
    }
    if (!open) continue;
    const auto space = line.find(' ');
    int u = 0;
    int v = 0;
    if (space == std::string::npos || !detail::parse_int(std::string_view(line).substr(0, space), u) ||
        !detail::parse_int(std::string_view(line).substr(space + 1), v)) {
      open = false;
      continue;
    }
    blocks.back().edges.emplace_back(u, v);
  }
  return blocks;
}

/// Plain-text listing of every record, sorted by (n, score, code), with an
/// audit summary up front.
inline std::string gallery(std::span<const CounterexampleRecord> records) {
  std::vector<const CounterexampleRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->n() != b->n()) return a->n() < b->n();
    if (a->score.value != b->score.value) return a->score.value < b->score.value;
    return a->code < b->code;
  });

  std::ostringstream out;
  if (sorted.empty()) {
    out << "0 counterexamples recorded.\n";
    return out.str();
  }
  std::map<std::string, int> classes;
  std::vector<const CounterexampleRecord*> violations;
  for (const auto* r : sorted) {
    ++classes[std::to_string(r->n()) + ':' + r->canonical];
    if (!r->conjecture_ok) violations.push_back(r);
  }
  out << sorted.size() << " counterexamples recorded, " << classes.size() << " isomorphism classes.\n";
  if (violations.empty()) {
    out << "Conjecture audit: every record has alpha >= floor(n/2) + beta + 1.\n";
  } else {
    out << "CONJECTURE VIOLATION: " << violations.size()
        << " record(s) have alpha < floor(n/2) + beta + 1:\n";
    for (const auto* r : violations) {
      out << "  " << format_code(r->code) << " (n=" << r->n() << ", index=" << r->score.index
          << ", alpha=" << r->alpha << ")\n";
    }
  }
  for (const auto* r : sorted) {
    out << '\n';
    write_edge_list(out, *r);
    out << "code: " << format_code(r->code) << '\n';
    out << "sequence: " << format_sequence(r->sequence) << '\n';
    out << "alpha: " << r->alpha << "  beta: " << r->score.beta << "  epoch: " << r->epoch_found
        << "  conjecture: " << (r->conjecture_ok ? "ok" : "VIOLATED") << '\n';
    out << "canonical: " << r->canonical << '\n';
  }
  return out.str();
}

inline std::string gallery(const Ledger& ledger) { return gallery(std::span<const CounterexampleRecord>(ledger.records())); }

}  // namespace treelc
