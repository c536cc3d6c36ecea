#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lookahead/decoders.hpp"
#include "support/fixtures.hpp"

namespace lookahead {
namespace {

using testing::kTok0;
using testing::kTok1;

void expect_well_formed(const DecodeResult& r, std::size_t max_length) {
  ASSERT_FALSE(r.tokens.empty());
  EXPECT_LE(r.tokens.size(), max_length);
  EXPECT_EQ(r.tokens.size(), r.per_step_log_probs.size());
  for (std::size_t i = 0; i + 1 < r.tokens.size(); ++i) EXPECT_NE(r.tokens[i], kEos) << "token after EOS";
  const double sum = std::accumulate(r.per_step_log_probs.begin(), r.per_step_log_probs.end(), 0.0);
  EXPECT_NEAR(r.score, sum, 1e-9);
}

TEST(Greedy, TwoStepToyPicksRootArgmax) {
  const auto m = testing::two_step_toy_model();
  const auto r = greedy_decode(m, {}, 5);
  expect_well_formed(r, 5);
  // Root row: Token#0 0.49, Token#1 0.50, EOS 0.01.
  EXPECT_EQ(r.tokens.front(), kTok1);
}

TEST(Greedy, ProbabilityOneChain) {
  const std::vector<TokenId> seq{5, 7, 4, 6};
  const auto m = testing::chain_model(seq);
  const auto r = greedy_decode(m, {}, 10);
  EXPECT_EQ(r.tokens, (std::vector<TokenId>{5, 7, 4, 6, kEos}));
  EXPECT_EQ(r.score, 0.0);
}

TEST(Greedy, ImmediateEos) {
  const auto m = testing::chain_model({});
  const auto r = greedy_decode(m, {}, 10);
  EXPECT_EQ(r.tokens, std::vector<TokenId>{kEos});
}

TEST(Greedy, StopsAtLengthBudget) {
  const auto m = testing::uniform_model(6);  // ties resolve to BOS (id 0) forever
  const auto r = greedy_decode(m, {}, 3);
  EXPECT_EQ(r.tokens, (std::vector<TokenId>{0, 0, 0}));
  EXPECT_FALSE(r.finished());
  EXPECT_EQ(greedy_decode(m, {}, 0).tokens.size(), default_max_length(0));
}

TEST(Greedy, DefaultBudgetFollowsSourceLength) {
  const auto m = testing::uniform_model(6);
  const std::vector<TokenId> src{4, 4, 4};
  EXPECT_EQ(greedy_decode(m, src).tokens.size(), 16u);
}

TEST(Lookahead, TwoStepToyTwoStepPicksToken0) {
  const auto m = testing::two_step_toy_model();
  const auto r = lookahead_decode(m, {}, {.k = 2, .max_length = 5});
  expect_well_formed(r, 5);
  EXPECT_EQ(r.tokens.front(), kTok0);
  ASSERT_FALSE(r.path_scores.empty());
  EXPECT_NEAR(r.path_scores.front(), std::log(0.8) + std::log(0.6), 1e-12);
}

TEST(Lookahead, EosTerminatedPathCanWin) {
  const auto m = testing::eos_bias_model();
  EXPECT_EQ(greedy_decode(m, {}, 6).tokens.front(), kTok0);
  const auto r = lookahead_decode(m, {}, {.k = 2, .max_length = 6});
  EXPECT_EQ(r.tokens, std::vector<TokenId>{kEos});
  EXPECT_NEAR(r.score, std::log(0.3), 1e-15);
}

TEST(Lookahead, RejectsZeroDepth) {
  const auto m = testing::two_step_toy_model();
  EXPECT_THROW(lookahead_decode(m, {}, {.k = 0, .max_length = 5}), UsageError);
}

TEST(Lookahead, KOneMatchesGreedyOnRandomModels) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = testing::random_table_model(seed, 4 + seed % 4, 1 + seed % 2, seed % 3 == 0 ? 0.3 : 0.0);
    const auto g = greedy_decode(m, {}, 8);
    const auto l = lookahead_decode(m, {}, {.k = 1, .max_length = 8});
    EXPECT_EQ(g.tokens, l.tokens) << "seed " << seed;
    EXPECT_EQ(g.score, l.score);
  }
}

TEST(Lookahead, ChosenPathsNeverIncreaseAlongTheSearch) {
  // Path scores are sums of log-probs <= 0, so the per-step winning score can
  // never be positive and never exceeds the emitted token's own log-prob.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = testing::random_table_model(seed, 5, 2);
    const auto r = lookahead_decode(m, {}, {.k = 3, .max_length = 8});
    for (std::size_t i = 0; i < r.path_scores.size(); ++i) {
      EXPECT_LE(r.path_scores[i], 0.0);
      EXPECT_LE(r.path_scores[i], r.per_step_log_probs[i] + 1e-15);
    }
  }
}

TEST(Beam, WidthOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = testing::random_table_model(seed, 4 + seed % 4, 1 + seed % 2, seed % 3 == 0 ? 0.3 : 0.0);
    const auto g = greedy_decode(m, {}, 8);
    const auto b = beam_decode(m, {}, {.beam_width = 1, .max_length = 8});
    EXPECT_EQ(g.tokens, b.best.tokens) << "seed " << seed;
    expect_well_formed(b.best, 8);
  }
}

TEST(Beam, DeterministicChainForAnyWidth) {
  const auto m = testing::chain_model({6, 5, 4});
  for (std::size_t w : {1u, 2u, 5u, 50u}) {
    const auto b = beam_decode(m, {}, {.beam_width = w, .max_length = 10});
    EXPECT_EQ(b.best.tokens, (std::vector<TokenId>{6, 5, 4, kEos}));
    EXPECT_EQ(b.best.score, 0.0);
  }
}

TEST(Beam, ExhaustiveWidthFindsGlobalMap) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t v = 4;
    const std::size_t t = 2 + seed % 5;  // 2..6
    const auto m = testing::random_table_model(seed, v, 1 + seed % 2);
    const auto width = static_cast<std::size_t>(std::pow(v, t));
    const auto b = beam_decode(m, {}, {.beam_width = width, .max_length = t});
    const auto map = testing::brute_force_map(m, {}, t);
    EXPECT_EQ(b.best.tokens, map.tokens) << "seed " << seed;
    EXPECT_NEAR(b.best.score, map.score, 1e-12);
  }
}

TEST(Beam, NBestIsRankedAndFinishedFirst) {
  const auto m = testing::random_table_model(4, 5, 1);
  const auto b = beam_decode(m, {}, {.beam_width = 6, .max_length = 5});
  ASSERT_LE(b.n_best.size(), 6u);
  bool seen_open = false;
  for (std::size_t i = 0; i < b.n_best.size(); ++i) {
    expect_well_formed(b.n_best[i], 5);
    if (!b.n_best[i].finished()) seen_open = true;
    if (seen_open) {
      EXPECT_FALSE(b.n_best[i].finished());
    }
    EXPECT_NEAR(b.n_best[i].score, testing::sequence_log_prob(m, {}, b.n_best[i].tokens), 1e-12);
  }
  EXPECT_EQ(b.best.tokens, b.n_best.front().tokens);
}

TEST(Rollout, KOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = testing::random_table_model(seed, 5, 2);
    const auto g = greedy_decode(m, {}, 8);
    for (std::size_t n : {1u, 20u}) {
      const auto r = rollout_decode(m, {}, {.k = 1, .n_rollouts = n, .max_length = 8, .seed = seed});
      EXPECT_EQ(g.tokens, r.tokens);
    }
  }
}

TEST(Rollout, ChainAndDeterminism) {
  const auto chain = testing::chain_model({4, 4, 7});
  const auto c = rollout_decode(chain, {}, {.k = 3, .n_rollouts = 5, .max_length = 10, .seed = 1});
  EXPECT_EQ(c.tokens, (std::vector<TokenId>{4, 4, 7, kEos}));
  const auto m = testing::random_table_model(21, 6, 2);
  const auto a = rollout_decode(m, {}, {.k = 3, .n_rollouts = 4, .max_length = 8, .seed = 99});
  const auto b = rollout_decode(m, {}, {.k = 3, .n_rollouts = 4, .max_length = 8, .seed = 99});
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(a.stats.nodes_expanded, b.stats.nodes_expanded);
  expect_well_formed(a, 8);
  EXPECT_THROW(rollout_decode(m, {}, {.k = 3, .n_rollouts = 0, .max_length = 8, .seed = 1}), UsageError);
}

TEST(AllDecoders, NeverEmitAfterEos) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto m = testing::random_table_model(seed, 4 + seed % 3, 1, 0.2);
    expect_well_formed(greedy_decode(m, {}, 7), 7);
    expect_well_formed(lookahead_decode(m, {}, {.k = 3, .max_length = 7}), 7);
    expect_well_formed(beam_decode(m, {}, {.beam_width = 3, .max_length = 7}).best, 7);
    expect_well_formed(rollout_decode(m, {}, {.k = 2, .n_rollouts = 3, .max_length = 7, .seed = seed}), 7);
  }
}

}  // namespace
}  // namespace lookahead
