#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "treelc/pipeline.hpp"

using namespace treelc;
namespace fs = std::filesystem;

namespace {

const PruferCode kCounterexample378 = PruferCode::from_tokens(
    {13, 15, 24, 18, 17, 23, 10, 10, 10, 16, 11, 10, 8, 14, 3, 7, 16, 25, 16, 8, 3, 3, 3, 4});
const PruferCode kCounterexample68 = PruferCode::from_tokens(
    {24, 18, 17, 23, 2, 1, 13, 10, 10, 16, 11, 10, 8, 14, 3, 7, 16, 25, 16, 8, 3, 3, 3, 4});

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("treelc_pipe_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<EdgePair> edges_of(const LabeledTree& t) { return {t.edges().begin(), t.edges().end()}; }

PruferCode relabeled(const PruferCode& c, Rng& rng) {
  const int n = c.n();
  std::vector<Vertex> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  shuffle(std::span<Vertex>(perm), rng);
  return encode(n, oracle::relabel(edges_of(decode(c)), perm));
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.n = 26;
  c.search.max_swaps = full_swap_budget(26);
  c.seed_count = 150;
  c.top_k = 150;
  c.generator.sample_count = 100;
  c.epochs = 2;
  c.rng_seed = 77;
  c.output_dir = out.string();
  return c;
}

/// Every file under `root`, path relative to root mapped to its contents.
std::map<std::string, std::string> tree_of_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST(Seed, ShapeAndDeterminism) {
  const auto one = seed_database(4, 1, 0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].size(), 2u);
  EXPECT_EQ(seed_database(26, 50, 5), seed_database(26, 50, 5));
  EXPECT_NE(seed_database(26, 50, 5), seed_database(26, 50, 6));
}

TEST(Seed, TokensAreUniform) {
  const int n = 26;
  const auto codes = seed_database(n, 10000, 123);
  std::vector<double> counts(static_cast<std::size_t>(n) + 1, 0.0);
  for (const auto& c : codes) {
    for (Vertex t : c.tokens()) ++counts[static_cast<std::size_t>(t)];
  }
  const double total = 10000.0 * (n - 2);
  const double expected = total / n;
  const double sigma = std::sqrt(total * (1.0 / n) * (1.0 - 1.0 / n));
  double chi2 = 0.0;
  for (int t = 1; t <= n; ++t) {
    EXPECT_LT(std::abs(counts[static_cast<std::size_t>(t)] - expected), 4 * sigma) << t;
    chi2 += (counts[static_cast<std::size_t>(t)] - expected) * (counts[static_cast<std::size_t>(t)] - expected) / expected;
  }
  // chi-square with n-1 degrees of freedom: mean n-1, sd sqrt(2(n-1)).
  EXPECT_LT(std::abs(chi2 - (n - 1)), 3 * std::sqrt(2.0 * (n - 1)));
}

TEST(Ledger, DedupAndClasses) {
  Ledger ledger;
  Rng rng(1);
  const auto r = make_record(kCounterexample378, 13, 1);
  EXPECT_TRUE(dedup_insert(ledger, r));
  EXPECT_FALSE(dedup_insert(ledger, r));
  const auto copy = relabeled(kCounterexample378, rng);
  ASSERT_NE(copy, kCounterexample378);
  EXPECT_TRUE(dedup_insert(ledger, make_record(copy, 13, 1)));
  EXPECT_EQ(ledger.distinct_codes(), 2u);
  EXPECT_EQ(ledger.distinct_classes(), 1u);
  EXPECT_TRUE(ledger.contains(copy));
  EXPECT_THROW(ledger.insert(make_record(PruferCode::star(26), 13, 1)), PreconditionError);
}

TEST(Ledger, ClassCountMatchesBruteForceIsomorphism) {
  Rng rng(2);
  Ledger ledger;
  std::vector<PruferCode> codes;
  for (int i = 0; i < 40; ++i) {
    const auto c = relabeled(i % 3 == 0 ? kCounterexample68 : kCounterexample378, rng);
    if (ledger.insert(make_record(c, 13, 1))) codes.push_back(c);
  }
  std::vector<int> cls(codes.size(), -1);
  int classes = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (cls[i] >= 0) continue;
    cls[i] = classes;
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      if (cls[j] < 0 && oracle::isomorphic_brute_force(26, edges_of(decode(codes[i])), edges_of(decode(codes[j])))) cls[j] = classes;
    }
    ++classes;
  }
  EXPECT_EQ(static_cast<std::size_t>(classes), ledger.distinct_classes());
  EXPECT_EQ(classes, 2);
}

TEST(Ledger, TextRoundTripAndVerify) {
  Ledger ledger;
  ledger.insert(make_record(kCounterexample378, 13, 2));
  ledger.insert(make_record(kCounterexample68, 13, 3));
  std::stringstream text;
  ledger.write(text);
  const auto first = text.str().substr(0, text.str().find('\n'));
  EXPECT_EQ(first.substr(0, first.find('\t')), format_code(kCounterexample378));
  EXPECT_NE(first.find("\t13\t378\t1,26,300,"), std::string::npos);

  const auto back = Ledger::read(text);
  ASSERT_EQ(back.distinct_codes(), 2u);
  EXPECT_EQ(back.records()[1].epoch_found, 3);
  EXPECT_EQ(back.records()[0].score.value, 378);
  EXPECT_EQ(back.distinct_classes(), 2u);

  std::stringstream again;
  back.write(again);
  std::istringstream fresh(again.str());
  const auto ok = verify_ledger(fresh);
  EXPECT_EQ(ok.checked, 2u);
  EXPECT_TRUE(ok.ok());

  auto tampered = again.str();
  tampered.replace(tampered.find("\t378\t"), 5, "\t379\t");
  std::istringstream bad(tampered);
  const auto report = verify_ledger(bad);
  ASSERT_EQ(report.mismatches.size(), 1u);
  EXPECT_EQ(report.mismatches[0].rfind("line 1:", 0), 0u) << report.mismatches[0];
}

TEST(Ledger, ConjectureFlagFromStoredFields) {
  auto line = format_record(make_record(kCounterexample378, 13, 1));
  EXPECT_TRUE(parse_record(line).conjecture_ok);
  std::istringstream in(line + "\n");
  EXPECT_TRUE(verify_ledger(in).violations.empty());
  line.replace(line.find("\t14\t"), 4, "\t13\t");
  EXPECT_FALSE(parse_record(line).conjecture_ok);
  std::istringstream tampered(line + "\n");
  const auto r = verify_ledger(tampered);
  EXPECT_EQ(r.mismatches.size(), 1u);
}

TEST(Config, JsonRoundTripAndValidation) {
  ExperimentConfig c;
  c.n = 56;
  c.search.index_mode = IndexMode::HalfMinusOne;
  c.search.punish_path = true;
  c.search.edge_order = EdgeOrder::Random;
  c.rng_seed = 0xffffffffffffffffULL;
  c.generator.smoothing = 0.25;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.rng_seed, c.rng_seed);

  auto bad = c;
  bad.n = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.top_k = c.seed_count + c.generator.sample_count + 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto j = to_json(c);
  j["search"]["index_mode"] = "quarter";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = to_json(c);
  j.erase("n");
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Epoch, AllPositiveDatabaseEarlyExits) {
  std::vector<PruferCode> db{kCounterexample68, kCounterexample378, kCounterexample68};
  ExperimentConfig c;
  c.n = 26;
  c.seed_count = 3;
  c.top_k = 2;
  c.generator.sample_count = 10;
  Ledger ledger;
  const auto out = run_epoch(db, c, 1, ledger);
  ASSERT_EQ(out.next_db.size(), 12u);
  EXPECT_EQ(out.next_db[0], kCounterexample378);
  EXPECT_EQ(out.next_db[1], kCounterexample68);
  EXPECT_EQ(out.report.best_score.value, 378);
  EXPECT_EQ(out.report.new_counterexamples, 2u);
  EXPECT_EQ(out.report.topk_positive, 2u);
  EXPECT_EQ(ledger.distinct_classes(), 2u);
  EXPECT_EQ(out.report.score_histogram.total(), 2u);
  EXPECT_EQ(out.report.alpha_histogram.total(), out.report.samples_kept);

  const auto again = run_epoch(db, c, 2, ledger);
  EXPECT_EQ(again.report.new_counterexamples, 0u);
  EXPECT_EQ(ledger.distinct_codes(), 2u);
  EXPECT_EQ(ledger.records()[0].epoch_found, 1);
}

TEST(Experiment, TinyRunCompletesWithEmptyLedger) {
  const auto dir = scratch("tiny");
  ExperimentConfig c;
  c.n = 10;
  c.seed_count = 100;
  c.top_k = 100;
  c.generator.sample_count = 50;
  c.epochs = 1;
  c.output_dir = dir.string();
  const auto s = run_experiment(c);
  EXPECT_EQ(s.epochs_completed, 1);
  EXPECT_EQ(s.ledger.distinct_codes(), 0u);
  for (const char* f : {"config", "seed.codes", "counterexamples.ledger", "summary", "epoch_1/topk.codes",
                        "epoch_1/report", "epoch_1/samples.codes", "epoch_1/score_histogram.csv",
                        "epoch_1/alpha_histogram.csv", "epoch_1/done"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "CONJECTURE_VIOLATIONS"));
  const auto report = nlohmann::json::parse(slurp(dir / "epoch_1/report"));
  EXPECT_EQ(report["topk_size"], 100);
  EXPECT_EQ(report["score_histogram"].get<std::string>().rfind("bucket_low,bucket_high,count\n", 0), 0u);
  EXPECT_EQ(load_config(dir).n, 10);
  EXPECT_THROW(run_experiment(c), ConfigError);
  fs::remove_all(dir);
}

TEST(Experiment, FindsCounterexamplesAndIsDeterministic) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto ca = small_config(a);
  auto cb = small_config(b);
  cb.output_dir = b.string();
  const auto sa = run_experiment(ca, RunOptions{1, nullptr});
  const auto sb = run_experiment(cb, RunOptions{3, nullptr});
  ASSERT_GT(sa.ledger.distinct_codes(), 0u);
  EXPECT_EQ(sa.ledger.distinct_classes(), 2u);
  EXPECT_LE(sa.ledger.distinct_classes(), sa.ledger.distinct_codes());
  auto fa = tree_of_files(a);
  auto fb = tree_of_files(b);
  fa.erase("config");
  fb.erase("config");
  EXPECT_EQ(fa, fb);

  ASSERT_EQ(sa.reports.size(), 2u);
  EXPECT_LE(sa.reports[0].distinct_codes, sa.reports[1].distinct_codes);
  std::ifstream ledger(a / "counterexamples.ledger");
  const auto v = verify_ledger(ledger);
  EXPECT_TRUE(v.ok());
  EXPECT_EQ(v.checked, sa.ledger.distinct_codes());
  for (const auto& r : sa.ledger.records()) EXPECT_TRUE(r.conjecture_ok);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, ResumeMatchesUninterruptedRun) {
  const auto whole = scratch("whole");
  const auto parts = scratch("parts");
  auto c = small_config(whole);
  c.epochs = 3;
  run_experiment(c);

  auto p = small_config(parts);
  p.epochs = 1;
  run_experiment(p);
  p.epochs = 3;
  // Simulate a crash inside epoch 2: artifacts without the done marker.
  auto crash = p;
  crash.epochs = 2;
  run_experiment(crash, {}, true);
  fs::remove(parts / "epoch_2" / "done");
  const auto resumed = run_experiment(p, {}, true);
  EXPECT_EQ(resumed.resumed_from, 1);
  EXPECT_EQ(resumed.epochs_completed, 3);

  auto fw = tree_of_files(whole);
  auto fp = tree_of_files(parts);
  for (auto* f : {&fw, &fp}) {
    f->erase("config");
    f->erase("summary");
  }
  EXPECT_EQ(fw, fp);

  const auto noop = run_experiment(p, {}, true);
  EXPECT_TRUE(noop.reports.empty());
  EXPECT_EQ(noop.epochs_completed, 3);
  EXPECT_EQ(slurp(whole / "counterexamples.ledger"), slurp(parts / "counterexamples.ledger"));
  fs::remove_all(whole);
  fs::remove_all(parts);
}
