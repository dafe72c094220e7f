#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "treelc/canonical.hpp"
#include "treelc/errors.hpp"
#include "treelc/generative.hpp"
#include "treelc/independence.hpp"
#include "treelc/ledger.hpp"
#include "treelc/local_search.hpp"
#include "treelc/prufer.hpp"
#include "treelc/random.hpp"
#include "treelc/reporting.hpp"

namespace treelc {

namespace fs = std::filesystem;

struct ExperimentConfig {
  int n = 26;
  SearchConfig search;
  GeneratorSpec generator;
  std::size_t seed_count = 5000;
  std::size_t top_k = 5000;
  int epochs = 5;
  std::uint64_t rng_seed = 0;
  std::string output_dir = "treelc_run";
  int histogram_buckets = 20;
  int train_parts = 49;
  int test_parts = 1;

  void validate() const {
    if (n < 4) throw ConfigError("n must be >= 4");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (seed_count < 1) throw ConfigError("seed count must be >= 1");
    if (top_k < 1) throw ConfigError("top-k must be >= 1");
    if (top_k > seed_count + generator.sample_count) {
      throw ConfigError("top-k (" + std::to_string(top_k) + ") exceeds seed count + samples (" +
                        std::to_string(seed_count + generator.sample_count) + ")");
    }
    if (histogram_buckets < 1) throw ConfigError("histogram buckets must be >= 1");
    if (train_parts < 1 || test_parts < 0) throw ConfigError("invalid train/test ratio");
    search.validate();
    generator.validate();
    if (search.index_mode != IndexMode::AlphaMinusK) target_index(n, search.index_mode, search.k, 0);
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"n", c.n},
      {"search",
       {{"index_mode", index_mode_name(c.search.index_mode)},
        {"k", c.search.k},
        {"max_swaps", c.search.max_swaps},
        {"edge_order", edge_order_name(c.search.edge_order)},
        {"punish_path", c.search.punish_path}}},
      {"generator",
       {{"kind", generator_kind_name(c.generator.kind)},
        {"markov_order", c.generator.markov_order},
        {"smoothing", c.generator.smoothing},
        {"external_command", c.generator.external_command},
        {"sample_count", c.generator.sample_count},
        {"train_iterations", c.generator.train_iterations}}},
      {"seed_count", c.seed_count},
      {"top_k", c.top_k},
      {"epochs", c.epochs},
      {"rng_seed", c.rng_seed},
      {"output_dir", c.output_dir},
      {"histogram_buckets", c.histogram_buckets},
      {"train_parts", c.train_parts},
      {"test_parts", c.test_parts},
  };
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.n = j.at("n").get<int>();
    const auto& s = j.at("search");
    c.search.index_mode = parse_index_mode(s.at("index_mode").get<std::string>());
    c.search.k = s.at("k").get<int>();
    c.search.max_swaps = s.at("max_swaps").get<int>();
    c.search.edge_order = parse_edge_order(s.at("edge_order").get<std::string>());
    c.search.punish_path = s.at("punish_path").get<bool>();
    const auto& g = j.at("generator");
    c.generator.kind = parse_generator_kind(g.at("kind").get<std::string>());
    c.generator.markov_order = g.at("markov_order").get<int>();
    c.generator.smoothing = g.at("smoothing").get<double>();
    c.generator.external_command = g.at("external_command").get<std::string>();
    c.generator.sample_count = g.at("sample_count").get<std::size_t>();
    c.generator.train_iterations = g.at("train_iterations").get<int>();
    c.seed_count = j.at("seed_count").get<std::size_t>();
    c.top_k = j.at("top_k").get<std::size_t>();
    c.epochs = j.at("epochs").get<int>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.histogram_buckets = j.at("histogram_buckets").get<int>();
    c.train_parts = j.at("train_parts").get<int>();
    c.test_parts = j.at("test_parts").get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

struct EpochReport {
  int epoch = 0;
  Score best_score;
  std::size_t population = 0;
  std::size_t topk_size = 0;
  std::size_t topk_positive = 0;
  std::size_t topk_paths = 0;
  Histogram score_histogram;
  Histogram alpha_histogram;
  double alpha_mean = 0.0;
  double alpha_reference = 0.0;
  std::size_t samples_raw = 0;
  std::size_t samples_kept = 0;
  std::size_t samples_rejected = 0;
  std::optional<double> train_perplexity;
  std::optional<double> test_perplexity;
  std::size_t new_counterexamples = 0;
  std::size_t distinct_codes = 0;
  std::size_t distinct_isomorphism_classes = 0;
  std::size_t conjecture_violations = 0;
};

inline nlohmann::json to_json(const EpochReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {
      {"epoch", r.epoch},
      {"best_score", {{"value", to_decimal(r.best_score.value)}, {"index", r.best_score.index}}},
      {"population", r.population},
      {"topk_size", r.topk_size},
      {"topk_positive", r.topk_positive},
      {"topk_paths", r.topk_paths},
      {"score_histogram", r.score_histogram.to_csv()},
      {"alpha_histogram", r.alpha_histogram.to_csv()},
      {"alpha_mean", r.alpha_mean},
      {"alpha_reference", r.alpha_reference},
      {"samples_raw", r.samples_raw},
      {"samples_kept", r.samples_kept},
      {"samples_rejected", r.samples_rejected},
      {"train_perplexity", opt(r.train_perplexity)},
      {"test_perplexity", opt(r.test_perplexity)},
      {"new_counterexamples", r.new_counterexamples},
      {"distinct_codes", r.distinct_codes},
      {"distinct_isomorphism_classes", r.distinct_isomorphism_classes},
      {"conjecture_violations", r.conjecture_violations},
  };
}

/// `count` codes with independent uniform tokens in 1..n.
inline std::vector<PruferCode> seed_database(int n, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PruferCode> codes;
  codes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Vertex> tokens(static_cast<std::size_t>(n - 2));
    for (auto& t : tokens) t = static_cast<Vertex>(uniform_below(rng, static_cast<std::uint64_t>(n)) + 1);
    codes.emplace_back(n, std::move(tokens));
  }
  return codes;
}

struct RunOptions {
  std::size_t threads = 0;
  std::ostream* log = nullptr;
};

struct EpochOutcome {
  std::vector<PruferCode> next_db;
  EpochReport report;
};

namespace detail {

enum SeedStream : std::uint64_t { kLocal = 1, kSplit = 2, kSample = 3 };

inline fs::path epoch_dir(const fs::path& root, int epoch) { return root / ("epoch_" + std::to_string(epoch)); }

inline void write_text(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw RuntimeFailure("cannot write " + tmp.string());
    out << text;
    if (!out) throw RuntimeFailure("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::vector<PruferCode> read_code_file(const fs::path& path, int n) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  return read_codes(in, n);
}

inline void log_line(const RunOptions& o, const std::string& s) {
  if (o.log) *o.log << s << std::endl;
}

}  // namespace detail

/// One local/global round: local search over `db`, harvest positives into the
/// ledger, keep the top_k results (score descending, code ascending), train
/// the generator on a train/test split of them, sample, filter, and merge.
/// When `out_dir` is non-empty every artifact of the epoch is written there;
/// the epoch's `done` marker is written last.
inline EpochOutcome run_epoch(std::span<const PruferCode> db, const ExperimentConfig& config, int epoch,
                              Ledger& ledger, const RunOptions& options = {}, const fs::path& out_dir = {}) {
  if (db.empty()) throw ValidationError("run_epoch needs a nonempty database");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  SearchConfig search = config.search;
  search.rng_seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(epoch), detail::kLocal);
  const auto results = batch_optimize(db, search, options.threads);

  EpochOutcome outcome;
  auto& report = outcome.report;
  report.epoch = epoch;
  report.population = db.size();
  const std::size_t before = ledger.distinct_codes();
  for (const auto& r : results) {
    for (const auto& [code, score] : r.visited_positive) {
      if (ledger.contains(code)) continue;
      auto record = make_record(code, score.index, epoch);
      if (record.score.value != score.value) {
        throw RuntimeFailure("search score disagrees with full rescoring for " + format_code(code));
      }
      ledger.insert(std::move(record));
    }
  }
  report.new_counterexamples = ledger.distinct_codes() - before;

  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = results[a].final_score.value;
    const auto& sb = results[b].final_score.value;
    if (sa != sb) return sa > sb;
    return results[a].final_code < results[b].final_code;
  });
  order.resize(std::min(config.top_k, order.size()));
  std::vector<PruferCode> topk;
  std::vector<BigInt> top_scores;
  topk.reserve(order.size());
  for (std::size_t i : order) {
    topk.push_back(results[i].final_code);
    top_scores.push_back(results[i].final_score.value);
    if (results[i].final_score.positive()) ++report.topk_positive;
    if (is_path(results[i].final_code)) ++report.topk_paths;
  }
  report.topk_size = topk.size();
  report.best_score = results[order.front()].final_score;
  report.score_histogram = score_histogram(std::span<const BigInt>(top_scores),
                                           HistogramSpec{config.histogram_buckets, HistogramScale::SignedLog,
                                                         HistogramPopulation::TopKScores});
  const auto t1 = clock::now();

  fs::path dir;
  if (!out_dir.empty()) {
    dir = detail::epoch_dir(out_dir, epoch);
    fs::create_directories(dir);
    std::ofstream out(dir / "topk.codes");
    write_codes(out, topk);
    if (!out) throw RuntimeFailure("write failed: " + (dir / "topk.codes").string());
  }

  const auto split = split_codes(topk, derive_seed(config.rng_seed, static_cast<std::uint64_t>(epoch), detail::kSplit),
                                 config.train_parts, config.test_parts);
  TrainingContext ctx;
  ctx.epoch = epoch;
  ctx.work_dir = dir.empty() ? fs::temp_directory_path() / ("treelc_gen_" + std::to_string(epoch)) : dir / "generator";
  auto generator = train(config.generator, split, ctx);
  const auto raw = generator->sample(config.generator.sample_count,
                                     derive_seed(config.rng_seed, static_cast<std::uint64_t>(epoch), detail::kSample));
  auto filtered = filter_valid(raw, config.n);
  report.samples_raw = raw.size();
  report.samples_kept = filtered.kept.size();
  report.samples_rejected = filtered.rejected;
  report.train_perplexity = generator->stats().train_perplexity;
  report.test_perplexity = generator->stats().test_perplexity;

  const auto alphas = alpha_distribution(filtered.kept);
  report.alpha_histogram = alphas.histogram();
  report.alpha_mean = alphas.mean;
  report.alpha_reference = 0.57 * config.n;

  report.distinct_codes = ledger.distinct_codes();
  report.distinct_isomorphism_classes = ledger.distinct_classes();
  report.conjecture_violations = ledger.conjecture_violations();

  outcome.next_db = std::move(topk);
  outcome.next_db.insert(outcome.next_db.end(), filtered.kept.begin(), filtered.kept.end());

  if (!dir.empty()) {
    {
      std::ofstream out(dir / "samples.codes");
      write_codes(out, filtered.kept);
      if (!out) throw RuntimeFailure("write failed: " + (dir / "samples.codes").string());
    }
    detail::write_text(dir / "report", to_json(report).dump(2) + "\n");
    detail::write_text(dir / "score_histogram.csv", report.score_histogram.to_csv());
    detail::write_text(dir / "alpha_histogram.csv", report.alpha_histogram.to_csv());
    ledger.save(out_dir / "counterexamples.ledger");
    if (ledger.conjecture_violations() > 0) {
      std::string text = "alpha >= floor(n/2) + beta + 1 fails for:\n";
      for (const auto& r : ledger.records()) {
        if (!r.conjecture_ok) text += format_record(r) + "\n";
      }
      detail::write_text(out_dir / "CONJECTURE_VIOLATIONS", text);
    }
    detail::write_text(dir / "done", "");
  }

  const auto t2 = clock::now();
  using secs = std::chrono::duration<double>;
  detail::log_line(options, "epoch " + std::to_string(epoch) + ": population " + std::to_string(db.size()) +
                                ", best score " + to_decimal(report.best_score.value) + ", new counterexamples " +
                                std::to_string(report.new_counterexamples) + ", ledger " +
                                std::to_string(report.distinct_codes) + " codes / " +
                                std::to_string(report.distinct_isomorphism_classes) + " classes, samples kept " +
                                std::to_string(report.samples_kept) + "/" + std::to_string(report.samples_raw) +
                                " (local " + std::to_string(secs(t1 - t0).count()) + "s, global " +
                                std::to_string(secs(t2 - t1).count()) + "s)");
  return outcome;
}

struct ExperimentSummary {
  ExperimentConfig config;
  Ledger ledger;
  /// Reports of the epochs run by this invocation.
  std::vector<EpochReport> reports;
  int epochs_completed = 0;
  int resumed_from = 0;
};

inline nlohmann::json summary_json(const ExperimentSummary& s) {
  nlohmann::json per_epoch = nlohmann::json::array();
  for (const auto& r : s.reports) per_epoch.push_back({{"epoch", r.epoch}, {"new_counterexamples", r.new_counterexamples}});
  return {
      {"epochs_completed", s.epochs_completed},
      {"distinct_codes", s.ledger.distinct_codes()},
      {"distinct_isomorphism_classes", s.ledger.distinct_classes()},
      {"conjecture_violations", s.ledger.conjecture_violations()},
      {"epochs_this_invocation", per_epoch},
  };
}

/// Last epoch e such that epoch_1..epoch_e all carry a `done` marker.
inline int last_completed_epoch(const fs::path& out_dir) {
  int e = 0;
  while (fs::exists(detail::epoch_dir(out_dir, e + 1) / "done")) ++e;
  return e;
}

inline ExperimentConfig load_config(const fs::path& out_dir) {
  std::ifstream in(out_dir / "config");
  if (!in) throw ConfigError("no configuration found in " + out_dir.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("unreadable configuration: ") + e.what());
  }
  return config_from_json(j);
}

/// Seeds (or resumes) and runs epochs up to config.epochs. Layout under
/// config.output_dir: config, seed.codes, epoch_<e>/{topk.codes, samples.codes,
/// report, *.csv, done}, counterexamples.ledger, summary.
inline ExperimentSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {},
                                        bool resume = false) {
  config.validate();
  const fs::path root(config.output_dir);
  ExperimentSummary summary;
  summary.config = config;

  std::vector<PruferCode> db;
  int start = 1;
  const bool has_state = fs::exists(root / "config");
  if (resume && has_state) {
    const int done = last_completed_epoch(root);
    if (fs::exists(root / "counterexamples.ledger")) {
      const auto loaded = Ledger::load(root / "counterexamples.ledger");
      for (const auto& r : loaded.records()) {
        if (r.epoch_found <= done) summary.ledger.insert(r);
      }
    }
    if (done == 0) {
      db = fs::exists(root / "seed.codes") ? detail::read_code_file(root / "seed.codes", config.n)
                                           : seed_database(config.n, config.seed_count, derive_seed(config.rng_seed, 0));
    } else {
      db = detail::read_code_file(detail::epoch_dir(root, done) / "topk.codes", config.n);
      const auto samples = detail::read_code_file(detail::epoch_dir(root, done) / "samples.codes", config.n);
      db.insert(db.end(), samples.begin(), samples.end());
    }
    start = done + 1;
    summary.resumed_from = done;
    detail::log_line(options, "resuming after epoch " + std::to_string(done));
  } else {
    if (has_state) {
      throw ConfigError("output directory " + root.string() + " already holds a run (use --resume)");
    }
    fs::create_directories(root);
    db = seed_database(config.n, config.seed_count, derive_seed(config.rng_seed, 0));
    std::ofstream out(root / "seed.codes");
    write_codes(out, db);
    if (!out) throw RuntimeFailure("write failed: " + (root / "seed.codes").string());
  }
  detail::write_text(root / "config", to_json(config).dump(2) + "\n");

  for (int epoch = start; epoch <= config.epochs; ++epoch) {
    auto outcome = run_epoch(db, config, epoch, summary.ledger, options, root);
    db = std::move(outcome.next_db);
    summary.reports.push_back(std::move(outcome.report));
  }
  summary.epochs_completed = std::max(start - 1, config.epochs);
  summary.ledger.save(root / "counterexamples.ledger");
  detail::write_text(root / "summary", summary_json(summary).dump(2) + "\n");
  return summary;
}

}  // namespace treelc
