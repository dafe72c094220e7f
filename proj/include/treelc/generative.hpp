#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treelc/errors.hpp"
#include "treelc/prufer.hpp"
#include "treelc/random.hpp"

namespace treelc {

enum class GeneratorKind { Markov, External };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Markov;
  int markov_order = 3;
  double smoothing = 0.01;
  /// Shell command prefix for EXTERNAL; positional arguments are appended.
  std::string external_command;
  std::size_t sample_count = 2000;
  /// Passed through to EXTERNAL; MARKOV ignores it.
  int train_iterations = 1000;

  void validate() const {
    if (markov_order < 1) throw ConfigError("markov order must be >= 1");
    if (!(smoothing > 0.0)) throw ConfigError("smoothing must be positive");
    if (sample_count < 1) throw ConfigError("sample count must be >= 1");
    if (kind == GeneratorKind::External && external_command.empty()) {
      throw ConfigError("external generator needs a command");
    }
  }
};

inline std::string_view generator_kind_name(GeneratorKind k) { return k == GeneratorKind::Markov ? "markov" : "external"; }

inline GeneratorKind parse_generator_kind(std::string_view s) {
  if (s == "markov") return GeneratorKind::Markov;
  if (s == "external") return GeneratorKind::External;
  throw ValidationError("unknown model '" + std::string(s) + "' (expected markov, external)");
}

struct TrainingSplit {
  std::vector<PruferCode> train;
  std::vector<PruferCode> test;
};

/// Shuffles a copy of `codes` and holds out floor(size * test_parts /
/// (train_parts + test_parts)) of them; 50,000 codes at 49:1 give 49,000/1,000.
inline TrainingSplit split_codes(std::span<const PruferCode> codes, std::uint64_t seed, int train_parts = 49,
                                 int test_parts = 1) {
  if (train_parts < 1 || test_parts < 0) throw ConfigError("invalid split ratio");
  std::vector<PruferCode> all(codes.begin(), codes.end());
  Rng rng(seed);
  shuffle(std::span<PruferCode>(all), rng);
  const std::size_t test_size = all.size() * static_cast<std::size_t>(test_parts) /
                                static_cast<std::size_t>(train_parts + test_parts);
  TrainingSplit split;
  split.test.assign(std::make_move_iterator(all.begin()),
                    std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(test_size)));
  split.train.assign(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(test_size)),
                     std::make_move_iterator(all.end()));
  return split;
}

struct TrainingStats {
  std::optional<double> train_perplexity;
  std::optional<double> test_perplexity;
  /// EXTERNAL: captured stdout/stderr of the bridge.
  std::string log_path;
};

/// Where a generator may put files, and which epoch it serves.
struct TrainingContext {
  std::filesystem::path work_dir;
  int epoch = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;
  /// Exactly `count` raw emissions for MARKOV; EXTERNAL passes through whatever
  /// lines the bridge wrote.
  virtual std::vector<std::string> sample(std::size_t count, std::uint64_t seed) = 0;
  virtual const TrainingStats& stats() const = 0;
};

/// Position-aware order-m Markov model over tokens 1..n:
/// P(t | position p, previous min(m, p) tokens) = (count + s) / (total + s n).
class MarkovGenerator final : public Generator {
 public:
  MarkovGenerator(int n, int order, double smoothing) : n_(n), order_(order), smoothing_(smoothing) {
    if (n < 2) throw ValidationError("markov model needs n >= 2");
    tables_.resize(static_cast<std::size_t>(n - 2));
  }

  void fit(std::span<const PruferCode> train) {
    for (const auto& code : train) {
      if (code.n() != n_) throw ValidationError("training codes mix vertex counts");
      const auto tokens = code.tokens();
      for (std::size_t p = 0; p < tokens.size(); ++p) {
        auto& counts = tables_[p][context_key(tokens, p)];
        counts.add(tokens[p]);
      }
    }
  }

  /// exp of the mean negative log-likelihood per token.
  double perplexity(std::span<const PruferCode> codes) const {
    double nll = 0.0;
    std::size_t tokens_seen = 0;
    for (const auto& code : codes) {
      const auto tokens = code.tokens();
      for (std::size_t p = 0; p < tokens.size(); ++p) {
        nll -= std::log(probability(p, context_key(tokens, p), tokens[p]));
        ++tokens_seen;
      }
    }
    return tokens_seen == 0 ? std::numeric_limits<double>::quiet_NaN() : std::exp(nll / static_cast<double>(tokens_seen));
  }

  /// Smoothed P(token | position, context of the given prefix).
  double probability(std::span<const Vertex> prefix, Vertex token) const {
    return probability(prefix.size(), context_key(prefix, prefix.size()), token);
  }

  std::vector<Vertex> sample_tokens(Rng& rng) const {
    std::vector<Vertex> tokens;
    tokens.reserve(tables_.size());
    for (std::size_t p = 0; p < tables_.size(); ++p) {
      const auto& table = tables_[p];
      const auto it = table.find(context_key(tokens, p));
      const double seen = it == table.end() ? 0.0 : static_cast<double>(it->second.total);
      const double mass = seen + smoothing_ * n_;
      double u = uniform01(rng) * mass;
      Vertex chosen = 0;
      if (u < seen) {
        for (const auto& [t, c] : it->second.entries) {
          u -= static_cast<double>(c);
          if (u < 0.0) {
            chosen = t;
            break;
          }
        }
        if (chosen == 0) chosen = it->second.entries.back().first;
      } else {
        chosen = static_cast<Vertex>(uniform_below(rng, static_cast<std::uint64_t>(n_)) + 1);
      }
      tokens.push_back(chosen);
    }
    return tokens;
  }

  std::vector<std::string> sample(std::size_t count, std::uint64_t seed) override {
    Rng rng(seed);
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(format_code(PruferCode(n_, sample_tokens(rng))));
    return out;
  }

  const TrainingStats& stats() const override { return stats_; }
  TrainingStats& mutable_stats() { return stats_; }

 private:
  struct Counts {
    std::vector<std::pair<Vertex, std::uint32_t>> entries;  // sorted by token
    std::uint64_t total = 0;

    void add(Vertex t) {
      auto it = std::lower_bound(entries.begin(), entries.end(), t,
                                 [](const auto& e, Vertex v) { return e.first < v; });
      if (it != entries.end() && it->first == t) {
        ++it->second;
      } else {
        entries.insert(it, {t, 1});
      }
      ++total;
    }

    std::uint32_t count(Vertex t) const {
      auto it = std::lower_bound(entries.begin(), entries.end(), t,
                                 [](const auto& e, Vertex v) { return e.first < v; });
      return it != entries.end() && it->first == t ? it->second : 0;
    }
  };

  std::string context_key(std::span<const Vertex> tokens, std::size_t p) const {
    const std::size_t start = p > static_cast<std::size_t>(order_) ? p - static_cast<std::size_t>(order_) : 0;
    std::string key;
    key.reserve((p - start) * 2);
    for (std::size_t i = start; i < p; ++i) {
      key.push_back(static_cast<char>(tokens[i] & 0xff));
      key.push_back(static_cast<char>((tokens[i] >> 8) & 0xff));
    }
    return key;
  }

  double probability(std::size_t p, const std::string& key, Vertex token) const {
    const auto& table = tables_[p];
    const auto it = table.find(key);
    const double c = it == table.end() ? 0.0 : static_cast<double>(it->second.count(token));
    const double total = it == table.end() ? 0.0 : static_cast<double>(it->second.total);
    return (c + smoothing_) / (total + smoothing_ * n_);
  }

  int n_;
  int order_;
  double smoothing_;
  std::vector<std::unordered_map<std::string, Counts>> tables_;
  TrainingStats stats_;
};

namespace detail {

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

inline void write_code_file(const std::filesystem::path& path, std::span<const PruferCode> codes) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  write_codes(out, codes);
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

}  // namespace detail

/// Delegates training and sampling to a subprocess invoked as
/// `<cmd> <train> <test> <count> <output> <iterations> <epoch>`.
class ExternalGenerator final : public Generator {
 public:
  ExternalGenerator(GeneratorSpec spec, const TrainingSplit& split, TrainingContext ctx)
      : spec_(std::move(spec)), ctx_(std::move(ctx)) {
    std::filesystem::create_directories(ctx_.work_dir);
    train_path_ = ctx_.work_dir / "train.codes";
    test_path_ = ctx_.work_dir / "test.codes";
    detail::write_code_file(train_path_, split.train);
    detail::write_code_file(test_path_, split.test);
    stats_.log_path = (ctx_.work_dir / "bridge.log").string();
  }

  std::vector<std::string> sample(std::size_t count, std::uint64_t /*seed*/) override {
    const auto output = ctx_.work_dir / "samples.raw";
    std::filesystem::remove(output);
    std::string cmd = spec_.external_command;
    for (const std::string& arg :
         {train_path_.string(), test_path_.string(), std::to_string(count), output.string(),
          std::to_string(spec_.train_iterations), std::to_string(ctx_.epoch)}) {
      cmd += ' ';
      cmd += detail::shell_quote(arg);
    }
    cmd += " > " + detail::shell_quote(stats_.log_path) + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status != 0) {
      throw RuntimeFailure("external generator exited with status " + std::to_string(status) + "; see " +
                           stats_.log_path);
    }
    std::ifstream in(output);
    if (!in) throw RuntimeFailure("external generator wrote no output file " + output.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
    return lines;
  }

  const TrainingStats& stats() const override { return stats_; }

 private:
  GeneratorSpec spec_;
  TrainingContext ctx_;
  std::filesystem::path train_path_;
  std::filesystem::path test_path_;
  TrainingStats stats_;
};

/// Trains the generator described by `spec` on `split`.
inline std::unique_ptr<Generator> train(const GeneratorSpec& spec, const TrainingSplit& split,
                                        const TrainingContext& ctx = {}) {
  spec.validate();
  if (split.train.empty()) throw ValidationError("cannot train a generator on an empty training set");
  const int n = split.train.front().n();
  for (const auto& c : split.test) {
    if (c.n() != n) throw ValidationError("training and test codes mix vertex counts");
  }
  if (spec.kind == GeneratorKind::External) return std::make_unique<ExternalGenerator>(spec, split, ctx);

  auto model = std::make_unique<MarkovGenerator>(n, spec.markov_order, spec.smoothing);
  model->fit(split.train);
  model->mutable_stats().train_perplexity = model->perplexity(split.train);
  if (!split.test.empty()) model->mutable_stats().test_perplexity = model->perplexity(split.test);
  return model;
}

struct FilterResult {
  std::vector<PruferCode> kept;
  std::size_t rejected = 0;
};

/// Keeps emissions that parse as n-2 integers in 1..n, in order.
inline FilterResult filter_valid(std::span<const std::string> raw, int n) {
  FilterResult result;
  result.kept.reserve(raw.size());
  for (const auto& line : raw) {
    PruferCode code;
    if (try_parse_code(line, n, code)) {
      result.kept.push_back(std::move(code));
    } else {
      ++result.rejected;
    }
  }
  return result;
}

}  // namespace treelc
