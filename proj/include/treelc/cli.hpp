#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treelc/canonical.hpp"
#include "treelc/errors.hpp"
#include "treelc/independence.hpp"
#include "treelc/ledger.hpp"
#include "treelc/pipeline.hpp"
#include "treelc/prufer.hpp"
#include "treelc/reporting.hpp"
#include "treelc/tree.hpp"

namespace treelc::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kRuntimeError = 3,
  kVerificationFailure = 4,
  kConjectureViolation = 5,
};

/// Exit status for a verify scan: mismatches dominate conjecture violations.
inline int verify_exit_code(const VerifyReport& r) {
  if (!r.mismatches.empty()) return kVerificationFailure;
  if (!r.violations.empty()) return kConjectureViolation;
  return kOk;
}

struct Preset {
  std::size_t seed_count;
  std::size_t samples;
  int epochs;
  int train_iterations;
};

inline Preset preset_named(const std::string& name) {
  if (name == "desk") return {5000, 2000, 5, 1000};
  if (name == "paper-local") return {50000, 2000, 3, 1000};
  if (name == "paper-gpu") return {50000, 100000, 5, 8000};
  throw ConfigError("unknown preset '" + name + "' (expected desk, paper-local, paper-gpu)");
}

namespace detail {

inline PruferCode code_from_flag(const std::string& text) {
  std::vector<Vertex> tokens;
  std::istringstream in(text);
  std::string field;
  std::size_t pos = 0;
  while (in >> field) {
    int v = 0;
    if (!treelc::detail::parse_int(field, v)) {
      throw ValidationError("token " + std::to_string(pos) + " is not an integer: '" + field + "'", pos);
    }
    tokens.push_back(v);
    ++pos;
  }
  return PruferCode::from_tokens(std::move(tokens));
}

/// Codes from --code or --file; a file's n is taken from its first line.
inline std::vector<PruferCode> input_codes(const std::string& code_text, const std::string& file, bool have_code) {
  if (have_code) return {code_from_flag(code_text)};
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read " + file);
  std::string first;
  while (std::getline(in, first) && first.empty()) {
  }
  if (first.empty()) return {};
  const int n = static_cast<int>(std::count(first.begin(), first.end(), ' ')) + 3;
  in.clear();
  in.seekg(0);
  return read_codes(in, n);
}

inline void print_score(std::ostream& out, const PruferCode& code, IndexMode mode, int k) {
  const auto seq = independence_sequence(decode(code));
  const int index = target_index(seq, mode, k);
  const auto s = score_at(seq, index);
  out << "code: " << format_code(code) << '\n';
  out << "n: " << code.n() << '\n';
  out << "sequence: " << format_sequence(seq) << '\n';
  out << "alpha: " << seq.alpha() << '\n';
  out << "index: " << index << " (" << index_mode_name(mode) << ")\n";
  out << "score: " << to_decimal(s.value) << '\n';
  std::vector<int> breaks;
  for (int i = 1; i <= seq.alpha(); ++i) {
    const auto d = score_at(seq, i);
    out << "verdict i=" << i << " defect=" << to_decimal(d.value) << ' '
        << (d.positive() ? "BREAK" : "ok") << '\n';
    if (d.positive()) breaks.push_back(i);
  }
  out << "log-concave: " << (breaks.empty() ? "yes" : "no") << '\n';
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Search for trees whose independence sequence is not log-concave"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // run
  auto* run = app.add_subcommand("run", "Run (or resume) a local/global search experiment");
  int n = 0;
  std::string index_mode = "half";
  int k = 1;
  std::string order_edges = "sorted";
  std::string max_swaps = "10";
  bool punish_path = false;
  std::string preset = "desk";
  std::size_t seed_count = 0;
  std::size_t top_k = 0;
  std::size_t samples = 0;
  std::string model = "markov";
  std::string external_cmd;
  int train_iterations = 0;
  int markov_order = 3;
  double smoothing = 0.01;
  int epochs = 0;
  std::uint64_t rng_seed = 0;
  std::string out_dir = "treelc_run";
  std::size_t threads = 0;
  bool resume = false;
  int buckets = 20;
  run->add_option("--n", n, "Vertex count");
  run->add_option("--index-mode", index_mode, "half | half-1 | alpha-k")->check(CLI::IsMember({"half", "half-1", "alpha-k"}));
  run->add_option("--k", k, "Offset for alpha-k mode");
  run->add_option("--order-edges", order_edges, "sorted | unsorted | random (or 1 | 0 | -1)")
      ->check(CLI::IsMember({"sorted", "unsorted", "random", "1", "0", "-1"}));
  run->add_option("--max-swaps", max_swaps, "Swap budget per tree, or 'full' for the non-edge count");
  run->add_flag("--punish-path", punish_path, "Replace path inputs by the star before searching");
  run->add_option("--preset", preset, "desk | paper-local | paper-gpu")
      ->check(CLI::IsMember({"desk", "paper-local", "paper-gpu"}));
  run->add_option("--seed-count", seed_count, "Number of uniform random seed codes");
  run->add_option("--top-k", top_k, "Training set size per epoch (default: seed count)");
  run->add_option("--samples", samples, "Generator samples per epoch");
  run->add_option("--model", model, "markov | external")->check(CLI::IsMember({"markov", "external"}));
  run->add_option("--external-cmd", external_cmd, "Bridge command for --model external");
  run->add_option("--train-iterations", train_iterations, "Training iterations passed to the bridge");
  run->add_option("--markov-order", markov_order, "Markov context length");
  run->add_option("--smoothing", smoothing, "Markov additive smoothing");
  run->add_option("--epochs", epochs, "Number of epochs");
  run->add_option("--rng-seed", rng_seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Local-phase worker threads (0 = all cores)");
  run->add_flag("--resume", resume, "Continue the run stored in --out");
  run->add_option("--buckets", buckets, "Score histogram buckets");

  // score
  auto* score = app.add_subcommand("score", "Score a code (or a file of codes)");
  std::string code_text;
  std::string code_file;
  std::string score_mode = "half";
  int score_k = 1;
  auto* code_opt = score->add_option("--code", code_text, "Space-separated tokens");
  auto* file_opt = score->add_option("--file", code_file, "Code file");
  code_opt->excludes(file_opt);
  score->add_option("--index-mode", score_mode)->check(CLI::IsMember({"half", "half-1", "alpha-k"}));
  score->add_option("--k", score_k);

  // verify
  auto* verify = app.add_subcommand("verify", "Rescore a ledger and audit the independence-number conjecture");
  std::string ledger_path;
  verify->add_option("--ledger", ledger_path, "Ledger file")->required();

  // report
  auto* report = app.add_subcommand("report", "Gallery, alpha distribution and score histogram");
  std::string report_ledger;
  std::string report_codes;
  std::string report_mode = "half";
  int report_k = 1;
  int report_buckets = 20;
  std::string report_scale = "signed-log";
  std::string edges_out;
  report->add_option("--ledger", report_ledger, "Ledger to render as a gallery");
  report->add_option("--codes", report_codes, "Code file for alpha distribution and score histogram");
  report->add_option("--index-mode", report_mode)->check(CLI::IsMember({"half", "half-1", "alpha-k"}));
  report->add_option("--k", report_k);
  report->add_option("--buckets", report_buckets);
  report->add_option("--scale", report_scale)->check(CLI::IsMember({"linear", "signed-log"}));
  report->add_option("--edges-out", edges_out, "Write ledger edge lists to this file");

  // decode
  auto* dec = app.add_subcommand("decode", "Print the edge list of a code");
  std::string decode_text;
  dec->add_option("--code", decode_text, "Space-separated tokens")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      RunOptions options;
      options.threads = threads;
      options.log = &err;
      ExperimentConfig config;
      const bool have_state = resume && std::filesystem::exists(std::filesystem::path(out_dir) / "config");
      if (have_state) {
        config = load_config(out_dir);
        config.output_dir = out_dir;
        if (run->count("--epochs")) config.epochs = epochs;
        for (const char* flag : {"--n", "--index-mode", "--k", "--order-edges", "--max-swaps", "--punish-path",
                                 "--preset", "--seed-count", "--top-k", "--samples", "--model", "--external-cmd",
                                 "--train-iterations", "--markov-order", "--smoothing", "--rng-seed", "--buckets"}) {
          if (run->count(flag)) err << "warning: " << flag << " ignored when resuming; the stored config wins\n";
        }
      } else {
        if (!run->count("--n")) throw ConfigError("run needs --n");
        const auto p = preset_named(preset);
        config.n = n;
        config.search.index_mode = parse_index_mode(index_mode);
        config.search.k = k;
        config.search.edge_order = parse_edge_order(order_edges);
        config.search.punish_path = punish_path;
        if (max_swaps == "full") {
          config.search.max_swaps = full_swap_budget(n);
        } else {
          int v = 0;
          if (!treelc::detail::parse_int(max_swaps, v)) throw ConfigError("--max-swaps expects an integer or 'full'");
          config.search.max_swaps = v;
        }
        config.seed_count = run->count("--seed-count") ? seed_count : p.seed_count;
        config.top_k = run->count("--top-k") ? top_k : config.seed_count;
        config.generator.kind = parse_generator_kind(model);
        config.generator.external_command = external_cmd;
        config.generator.sample_count = run->count("--samples") ? samples : p.samples;
        config.generator.train_iterations = run->count("--train-iterations") ? train_iterations : p.train_iterations;
        config.generator.markov_order = markov_order;
        config.generator.smoothing = smoothing;
        config.epochs = run->count("--epochs") ? epochs : p.epochs;
        config.rng_seed = rng_seed;
        config.output_dir = out_dir;
        config.histogram_buckets = buckets;
      }
      config.validate();
      const auto summary = run_experiment(config, options, resume);
      out << summary_json(summary).dump(2) << '\n';
      if (summary.ledger.conjecture_violations() > 0) {
        err << "CONJECTURE VIOLATION: " << summary.ledger.conjecture_violations()
            << " counterexample(s) break alpha >= floor(n/2) + beta + 1; see "
            << (std::filesystem::path(out_dir) / "CONJECTURE_VIOLATIONS").string() << '\n';
      }
      return kOk;
    }

    if (*score) {
      if (!*code_opt && !*file_opt) throw ConfigError("score needs --code or --file");
      const auto codes = detail::input_codes(code_text, code_file, static_cast<bool>(*code_opt));
      const auto mode = parse_index_mode(score_mode);
      for (std::size_t i = 0; i < codes.size(); ++i) {
        if (i) out << '\n';
        detail::print_score(out, codes[i], mode, score_k);
      }
      return kOk;
    }

    if (*verify) {
      std::ifstream in(ledger_path);
      if (!in) throw RuntimeFailure("cannot read ledger " + ledger_path);
      const auto r = verify_ledger(in);
      for (const auto line : r.violations) {
        out << "CONJECTURE VIOLATION at ledger line " << line << ": alpha < floor(n/2) + beta + 1\n";
      }
      for (const auto& m : r.mismatches) out << "MISMATCH " << m << '\n';
      out << "verified " << r.checked << " record(s): " << r.mismatches.size() << " mismatch(es), "
          << r.violations.size() << " conjecture violation(s)\n";
      return verify_exit_code(r);
    }

    if (*report) {
      if (report_ledger.empty() && report_codes.empty()) throw ConfigError("report needs --ledger and/or --codes");
      if (!report_ledger.empty()) {
        const auto ledger = Ledger::load(report_ledger);
        out << gallery(ledger);
        if (!edges_out.empty()) {
          std::ofstream eo(edges_out);
          if (!eo) throw RuntimeFailure("cannot write " + edges_out);
          for (const auto& r : ledger.records()) write_edge_list(eo, r);
        }
      }
      if (!report_codes.empty()) {
        const auto codes = detail::input_codes("", report_codes, false);
        if (codes.empty()) throw ValidationError("no codes in " + report_codes);
        const auto dist = alpha_distribution(codes);
        out << "\nalpha distribution over " << dist.total << " codes (n=" << dist.n << "): mean " << dist.mean
            << ", reference 0.57n = " << dist.reference() << '\n';
        out << dist.histogram().to_csv();
        const auto mode = parse_index_mode(report_mode);
        std::vector<BigInt> values;
        for (const auto& c : codes) {
          const auto seq = independence_sequence(decode(c));
          values.push_back(score_at(seq, target_index(seq, mode, report_k)).value);
        }
        HistogramSpec spec{report_buckets, report_scale == "linear" ? HistogramScale::Linear : HistogramScale::SignedLog,
                           HistogramPopulation::TopKScores};
        out << "\nscore histogram (" << report_scale << ")\n" << score_histogram(std::span<const BigInt>(values), spec).to_csv();
      }
      return kOk;
    }

    if (*dec) {
      const auto code = detail::code_from_flag(decode_text);
      const auto tree = decode(code);
      out << "# n=" << code.n() << " canonical=" << canonical_hash(tree) << '\n';
      for (const auto& e : tree.edges()) out << e.u << ' ' << e.v << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace treelc::cli
