#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "treelc/independence.hpp"
#include "treelc/random.hpp"

using namespace treelc;

namespace {

std::vector<BigInt> B(std::initializer_list<long long> v) { return {v.begin(), v.end()}; }

PruferCode path_code(int n) {
  std::vector<Vertex> t;
  for (int v = 2; v < n; ++v) t.push_back(v);
  return PruferCode(n, t);
}

IndependenceSequence seq_of(const PruferCode& c) { return independence_sequence(decode(c)); }

const PruferCode kCounterexample378 = PruferCode::from_tokens(
    {13, 15, 24, 18, 17, 23, 10, 10, 10, 16, 11, 10, 8, 14, 3, 7, 16, 25, 16, 8, 3, 3, 3, 4});
const PruferCode kCounterexample68 = PruferCode::from_tokens(
    {24, 18, 17, 23, 2, 1, 13, 10, 10, 16, 11, 10, 8, 14, 3, 7, 16, 25, 16, 8, 3, 3, 3, 4});

}  // namespace

TEST(Sequence, Examples) {
  EXPECT_EQ(seq_of(PruferCode(2, {})).coeffs, B({1, 2}));
  EXPECT_EQ(seq_of(PruferCode(4, {2, 3})).coeffs, B({1, 4, 3}));
  EXPECT_EQ(seq_of(PruferCode(5, {4, 4, 4})).coeffs, B({1, 5, 6, 4, 1}));
}

TEST(Sequence, IndependenceNumberExamples) {
  EXPECT_EQ(independence_number(seq_of(PruferCode(4, {2, 3}))), 2);
  EXPECT_EQ(independence_number(seq_of(PruferCode(5, {4, 4, 4}))), 4);
  EXPECT_EQ(independence_number(seq_of(path_code(6))), 3);
}

TEST(Sequence, MatchesBruteForce) {
  Rng rng(1);
  for (int n = 2; n <= 16; ++n) {
    for (int rep = 0; rep < 40; ++rep) {
      const auto t = decode(oracle::random_code(n, rng));
      ASSERT_EQ(independence_sequence(t).coeffs, oracle::brute_force_sequence(t)) << encode(t);
    }
  }
}

TEST(Sequence, StructuralInvariants) {
  Rng rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 200));
    const auto t = decode(oracle::random_code(n, rng));
    const auto s = independence_sequence(t);
    ASSERT_EQ(s.coeffs[0], 1);
    ASSERT_EQ(s.coeffs[1], n);
    for (const auto& c : s.coeffs) ASSERT_GT(c, 0);
    ASSERT_GE(s.alpha(), (n + 1) / 2);
    ASSERT_LE(s.alpha(), n - 1);
    ASSERT_EQ(s.alpha(), max_independent_set_size(t));
  }
}

TEST(Sequence, PathClosedFormAndFibonacci) {
  for (int n = 2; n <= 101; ++n) {
    const auto s = seq_of(path_code(n));
    ASSERT_EQ(s.alpha(), (n + 1) / 2);
    for (int k = 0; k <= s.alpha(); ++k) ASSERT_EQ(s.at(k), oracle::binomial(n - k + 1, k)) << n << ' ' << k;
    ASSERT_EQ(s.total(), oracle::fibonacci(n + 2));
  }
  EXPECT_EQ(to_decimal(seq_of(path_code(101)).total()), "1500520536206896083277");
}

TEST(Sequence, StarClosedForm) {
  for (int m = 1; m <= 100; ++m) {
    const auto s = seq_of(PruferCode::star(m + 1, 2));
    ASSERT_EQ(s.alpha(), std::max(m, 1));
    for (int k = 0; k <= m; ++k) {
      const BigInt expected = oracle::binomial(m, k) + (k == 1 ? 1 : 0);
      ASSERT_EQ(s.at(k), expected) << m << ' ' << k;
    }
  }
}

TEST(Sequence, KernelWidthBoundaries) {
  // Paths straddling the machine-word kernel limits.
  for (int n : {62, 63, 64, 65, 126, 127, 128, 129, 300}) {
    const auto s = seq_of(path_code(n));
    for (int k = 0; k <= s.alpha(); ++k) ASSERT_EQ(s.at(k), oracle::binomial(n - k + 1, k)) << n << ' ' << k;
    const auto score = score_at(s, n / 2);
    const BigInt expected = s.at(n / 2 - 1) * s.at(n / 2 + 1) - s.at(n / 2) * s.at(n / 2);
    ASSERT_EQ(score.value, expected);
  }
  for (int n : {63, 64, 127, 128}) {
    const auto s = seq_of(PruferCode::star(n));
    ASSERT_EQ(s.at(n / 2), oracle::binomial(n - 1, n / 2));
  }
}

TEST(Sequence, LabelInvariance) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 80));
    const auto edges = oracle::random_tree_edges(n, rng);
    std::vector<Vertex> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    shuffle(std::span<Vertex>(perm), rng);
    ASSERT_EQ(independence_sequence(LabeledTree::from_edges(n, edges)),
              independence_sequence(LabeledTree::from_edges(n, oracle::relabel(edges, perm))));
  }
}

TEST(Sequence, ForestMultiplicativity) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const int a = 2 + static_cast<int>(uniform_below(rng, 8));
    const int b = 2 + static_cast<int>(uniform_below(rng, 8));
    const auto ea = oracle::random_tree_edges(a, rng);
    const auto eb = oracle::random_tree_edges(b, rng);
    auto forest = ea;
    for (const auto& e : eb) forest.emplace_back(e.u + a, e.v + a);
    const auto pa = independence_sequence(LabeledTree::from_edges(a, ea)).coeffs;
    const auto pb = independence_sequence(LabeledTree::from_edges(b, eb)).coeffs;
    std::vector<BigInt> product(pa.size() + pb.size() - 1, 0);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      for (std::size_t j = 0; j < pb.size(); ++j) product[i + j] += pa[i] * pb[j];
    }
    ASSERT_EQ(product, oracle::brute_force_sequence(a + b, forest));
  }
}

TEST(Score, Examples) {
  const auto p6 = seq_of(path_code(6));
  EXPECT_EQ(p6.coeffs, B({1, 6, 10, 4}));
  EXPECT_EQ(score_at(p6, 3).value, -16);
  const auto star = seq_of(PruferCode(5, {4, 4, 4}));
  EXPECT_EQ(score_at(star, 1).value, -19);
  EXPECT_EQ(score_at(seq_of(PruferCode(4, {2, 3})), 2).value, -9);
}

TEST(Score, BeyondAlphaReadsZero) {
  const auto s = seq_of(PruferCode(5, {4, 4, 4}));
  EXPECT_EQ(score_at(s, s.alpha()).value, -1);
  EXPECT_EQ(score_at(s, s.alpha() + 1).value, 0);
  EXPECT_THROW(score_at(s, 0), ValidationError);
  EXPECT_THROW(score_at(s, -2), ValidationError);
}

TEST(Score, SignMatchesLogConcavityPredicate) {
  Rng rng(8);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 15));
    const auto t = decode(oracle::random_code(n, rng));
    const auto brute = oracle::brute_force_sequence(t);
    const auto s = independence_sequence(t);
    auto a = [&](int j) { return j < 0 || j >= static_cast<int>(brute.size()) ? BigInt(0) : brute[static_cast<std::size_t>(j)]; };
    for (int i = 1; i <= s.alpha(); ++i) {
      const bool concave_here = a(i) * a(i) >= a(i - 1) * a(i + 1);
      ASSERT_EQ(score_at(s, i).positive(), !concave_here);
    }
  }
}

TEST(Score, KnownCounterexamples) {
  const auto a = seq_of(kCounterexample378);
  EXPECT_EQ(format_sequence(a), "1,26,300,2040,9142,28551,63933,103736,121376,100144,55499,18683,2979,51,1");
  EXPECT_EQ(score_at(a, 13).value, 378);
  const auto b = seq_of(kCounterexample68);
  EXPECT_EQ(score_at(b, 13).value, 68);
  EXPECT_EQ(oracle::brute_force_sequence(decode(kCounterexample68)), b.coeffs);
  EXPECT_TRUE(check_alpha_conjecture(a, 13));
  EXPECT_TRUE(check_alpha_conjecture(b, 13));
}

TEST(TargetIndex, Examples) {
  EXPECT_EQ(target_index(26, IndexMode::Half, 1, 14), 13);
  EXPECT_EQ(target_index(56, IndexMode::HalfMinusOne, 1, 30), 27);
  EXPECT_EQ(target_index(26, IndexMode::AlphaMinusK, 2, 14), 12);
  EXPECT_THROW(target_index(4, IndexMode::AlphaMinusK, 2, 2), ValidationError);
  EXPECT_THROW(target_index(3, IndexMode::HalfMinusOne, 1, 2), ValidationError);
}

TEST(TargetIndex, ModeNamesRoundTrip) {
  for (auto m : {IndexMode::Half, IndexMode::HalfMinusOne, IndexMode::AlphaMinusK}) {
    EXPECT_EQ(parse_index_mode(index_mode_name(m)), m);
  }
  EXPECT_THROW(parse_index_mode("middle"), ValidationError);
}

TEST(Conjecture, Examples) {
  IndependenceSequence s60{60, std::vector<BigInt>(32, 1)};
  EXPECT_TRUE(check_alpha_conjecture(s60, 30));
  IndependenceSequence s60b{60, std::vector<BigInt>(31, 1)};
  EXPECT_FALSE(check_alpha_conjecture(s60b, 30));
  IndependenceSequence s56{56, std::vector<BigInt>(31, 1)};
  EXPECT_TRUE(check_alpha_conjecture(s56, 27));
  IndependenceSequence s56b{56, std::vector<BigInt>(30, 1)};
  EXPECT_FALSE(check_alpha_conjecture(s56b, 27));
}

TEST(Serialization, SequenceRoundTrip) {
  const auto s = seq_of(path_code(101));
  EXPECT_EQ(parse_sequence(format_sequence(s)), s.coeffs);
  EXPECT_THROW(parse_sequence("1,,2"), ValidationError);
  EXPECT_THROW(parse_sequence("1,x"), ValidationError);
}
