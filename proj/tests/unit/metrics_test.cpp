#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lookahead/metrics.hpp"

namespace lookahead {
namespace {

using Sent = std::vector<std::string>;

Sent words(const std::string& s) {
  std::istringstream in(s);
  Sent out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

EvalReport bleu(const std::vector<Sent>& h, const std::vector<Sent>& r, bool smooth = false) {
  return corpus_bleu(std::span<const Sent>(h), std::span<const Sent>(r), BleuOptions{smooth});
}

// Frozen from tests/oracles/bleu_fixture.py (sacrebleu, tokenize='none').
constexpr double kCatFloorBleu = 25.40663740773073;
constexpr double kTwoPairsBleu = 51.37480412538587;
constexpr double kTwoPairsBp = 0.9200444146293233;

TEST(Bleu, IdenticalCorporaScore100) {
  const std::vector<Sent> c{words("a b c d e"), words("x y z w"), words("the quick brown fox jumps")};
  const auto r = bleu(c, c);
  EXPECT_DOUBLE_EQ(r.bleu, 100.0);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, ShortIdenticalSentencesStillScore100) {
  // No sentence has a 4-gram (and the first corpus no 3-gram either); orders
  // with no n-grams on either side count as precision 1.
  const std::vector<Sent> c{words("a b"), words("c")};
  EXPECT_DOUBLE_EQ(bleu(c, c).bleu, 100.0);
  const std::vector<Sent> d{words("a b c"), words("d e")};
  EXPECT_DOUBLE_EQ(bleu(d, d).bleu, 100.0);
  // A short hypothesis against a long reference has real 4-gram misses.
  EXPECT_EQ(bleu({words("a b c")}, {words("a b c d")}).bleu, 0.0);
}

TEST(Bleu, EmptyHypothesesScoreZero) {
  const auto r = bleu({Sent{}, Sent{}}, {words("a b c d"), words("e f g h")});
  EXPECT_EQ(r.bleu, 0.0);
}

TEST(Bleu, CatFixtureMatchesOracle) {
  const std::vector<Sent> h{words("the cat sat on the mat")}, r{words("the cat is on the mat")};
  EXPECT_EQ(bleu(h, r).bleu, 0.0);  // no 4-gram match, no smoothing
  const auto s = bleu(h, r, true);
  EXPECT_NEAR(s.bleu, kCatFloorBleu, 0.01);
  EXPECT_NEAR(s.n_gram_precisions[0], 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.n_gram_precisions[1], 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(s.n_gram_precisions[2], 1.0 / 4.0, 1e-12);
  EXPECT_NEAR(s.n_gram_precisions[3], 0.1 / 3.0, 1e-12);
}

TEST(Bleu, PooledCountsAndBrevityPenalty) {
  const std::vector<Sent> h{words("the cat sat on the mat today"), words("a b c d e")};
  const std::vector<Sent> r{words("the cat is on the mat"), words("a b c d e f g")};
  const auto rep = bleu(h, r);
  EXPECT_NEAR(rep.bleu, kTwoPairsBleu, 0.01);
  EXPECT_NEAR(rep.brevity_penalty, kTwoPairsBp, 1e-12);
  EXPECT_EQ(rep.hypothesis_length, 12u);
  EXPECT_EQ(rep.reference_length, 13u);
}

TEST(Bleu, ClipsRepeatedNgrams) {
  const auto rep = bleu({words("the the the the the the the")}, {words("the cat is on the mat")}, true);
  EXPECT_NEAR(rep.n_gram_precisions[0], 2.0 / 7.0, 1e-12);
}

TEST(Bleu, RangeAndPermutationInvariance) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> tok(0, 5), len(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<int>> h, r;
    for (int i = 0; i < 6; ++i) {
      h.emplace_back(len(gen));
      r.emplace_back(1 + len(gen));
      for (auto& x : h.back()) x = tok(gen);
      for (auto& x : r.back()) x = tok(gen);
    }
    using V = std::vector<int>;
    const double b = corpus_bleu(std::span<const V>(h), std::span<const V>(r)).bleu;
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 100.0);
    std::vector<std::size_t> perm{5, 3, 1, 0, 2, 4};
    std::vector<V> hp, rp;
    for (auto i : perm) {
      hp.push_back(h[i]);
      rp.push_back(r[i]);
    }
    EXPECT_NEAR(corpus_bleu(std::span<const V>(hp), std::span<const V>(rp)).bleu, b, 1e-9);
  }
}

TEST(Bleu, CountMismatchIsUsageError) {
  EXPECT_THROW(bleu({words("a")}, {words("a"), words("b")}), UsageError);
  EXPECT_THROW(bleu({}, {}), UsageError);
}

using IntSeq = std::vector<int>;

double ald(const std::vector<IntSeq>& h, const std::vector<IntSeq>& r) {
  return avg_length_diff(std::span<const IntSeq>(h), std::span<const IntSeq>(r));
}

TEST(AvgLengthDiff, Examples) {
  const std::vector<IntSeq> r{{1, 2, 3, 4}, {1, 2, 3, 4}};
  EXPECT_EQ(ald(r, r), 0.0);
  EXPECT_EQ(ald({{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}}, r), 1.0);
  EXPECT_EQ(ald({{1, 2, 3}, {1, 2, 3, 4, 5}}, r), 0.0);
  EXPECT_THROW(ald({}, {}), UsageError);
  EXPECT_THROW(ald({{1}}, {}), UsageError);
}

TEST(AvgLengthDiff, ShiftsLinearly) {
  std::vector<IntSeq> h{{1}, {1, 2, 3}, {}}, r{{1, 2}, {1}, {1, 2, 3}};
  const double base = ald(h, r);
  for (auto& s : h) s.insert(s.end(), 3, 9);
  EXPECT_NEAR(ald(h, r), base + 3.0, 1e-12);
}

TEST(FilterByTargetLength, Examples) {
  const std::vector<IntSeq> refs{IntSeq(10), IntSeq(25), IntSeq(30)};
  const std::span<const IntSeq> s(refs);
  EXPECT_EQ(filter_by_target_length(s, 0).size(), 3u);
  EXPECT_TRUE(filter_by_target_length(s, 31).empty());
  EXPECT_EQ(filter_by_target_length(s, 25), (std::vector<std::size_t>{1, 2}));
}

TEST(Evaluate, FillsBuckets) {
  const std::vector<IntSeq> r{IntSeq(10, 1), IntSeq(25, 2), IntSeq(30, 3)};
  std::vector<IntSeq> h = r;
  h[1].pop_back();
  const std::vector<std::size_t> buckets{0, 25, 100};
  const auto rep = evaluate(std::span<const IntSeq>(h), std::span<const IntSeq>(r), buckets);
  ASSERT_EQ(rep.per_bucket.size(), 3u);
  EXPECT_EQ(rep.per_bucket.at(0).count, 3u);
  EXPECT_EQ(rep.per_bucket.at(25).count, 2u);
  EXPECT_NEAR(rep.per_bucket.at(25).avg_length_diff, -0.5, 1e-12);
  EXPECT_EQ(rep.per_bucket.at(100).count, 0u);
  EXPECT_NEAR(rep.avg_length_diff, -1.0 / 3.0, 1e-12);
}

}  // namespace
}  // namespace lookahead
