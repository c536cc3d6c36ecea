#pragma once

// Shared test fixtures and brute-force oracles. Nothing here calls into the
// decoders; the oracles only use TableModel::step.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "lookahead/table_model.hpp"

namespace lookahead::testing {

inline constexpr TokenId kTok0 = 4;  // "Token#0"
inline constexpr TokenId kTok1 = 5;  // "Token#1"

inline std::vector<double> row(std::size_t v, std::initializer_list<std::pair<TokenId, double>> entries) {
  std::vector<double> r(v, 0.0);
  for (auto [t, p] : entries) r[t] = p;
  return r;
}

/// Two-step look-ahead toy tree over {Token#0, Token#1, EOS}. Greedy takes
/// Token#1 (0.50) at the root; Token#0's best continuation has probability
/// 0.49 * 48/49 = 0.8 * 0.6 and beats every other depth-2 path.
inline TableModel two_step_toy_model() {
  TableModelSpec s;
  s.vocab = Vocabulary({"Token#0", "Token#1"});
  s.context_length = 2;
  const std::size_t v = s.vocab.size();
  s.rows.push_back({{kBos, kBos}, row(v, {{kTok0, 0.49}, {kTok1, 0.50}, {kEos, 0.01}})});
  s.rows.push_back({{kBos, kTok0}, row(v, {{kTok0, 48.0 / 49.0}, {kTok1, 1.0 / 49.0}})});
  s.rows.push_back({{kBos, kTok1}, row(v, {{kTok0, 0.9}, {kTok1, 0.05}, {kEos, 0.05}})});
  s.default_row = row(v, {{kEos, 1.0}});
  return TableModel(std::move(s));
}

/// Deterministic chain: emits `seq` then EOS with probability 1 at each step.
inline TableModel chain_model(const std::vector<TokenId>& seq, std::size_t vocab_size = 8) {
  TableModelSpec s;
  s.vocab = Vocabulary::synthetic(vocab_size);
  s.context_length = seq.size() + 1;
  const std::size_t v = s.vocab.size();
  std::vector<TokenId> ctx(s.context_length, kBos);
  for (std::size_t i = 0; i <= seq.size(); ++i) {
    const TokenId next = i < seq.size() ? seq[i] : kEos;
    s.rows.push_back({ctx, row(v, {{next, 1.0}})});
    if (i < seq.size()) {
      std::shift_left(ctx.begin(), ctx.end(), 1);
      ctx.back() = seq[i];
    }
  }
  s.default_row = row(v, {{kEos, 1.0}});
  return TableModel(std::move(s));
}

inline TableModel uniform_model(std::size_t vocab_size) {
  TableModelSpec s;
  s.vocab = Vocabulary::synthetic(vocab_size);
  s.context_length = 0;
  s.default_row.assign(vocab_size, 1.0 / static_cast<double>(vocab_size));
  return TableModel(std::move(s));
}

/// Random table model over every context of length `context_length`.
/// With `zero_prob` > 0 some entries are exactly zero (but never a whole row).
/// `eos_damp` < 1 scales EOS weight down before normalization, which yields
/// longer decodes.
inline TableModel random_table_model(std::uint64_t seed, std::size_t vocab_size, std::size_t context_length,
                                     double zero_prob = 0.0, double skew = 1.0, double eos_damp = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto make_row = [&] {
    std::vector<double> r(vocab_size);
    double sum = 0.0;
    for (auto& x : r) {
      x = u(gen) < zero_prob ? 0.0 : std::pow(u(gen), skew) + 1e-3;
    }
    r[kEos] *= eos_damp;
    for (double x : r) sum += x;
    if (sum == 0.0) {
      r[gen() % vocab_size] = 1.0;
      sum = 1.0;
    }
    for (auto& x : r) x /= sum;
    return r;
  };
  TableModelSpec s;
  s.vocab = Vocabulary::synthetic(vocab_size);
  s.context_length = context_length;
  std::vector<TokenId> ctx(context_length, 0);
  if (context_length > 0) {
    while (true) {
      s.rows.push_back({ctx, make_row()});
      std::size_t i = 0;
      while (i < ctx.size() && ++ctx[ctx.size() - 1 - i] == vocab_size) ctx[ctx.size() - 1 - i++] = 0;
      if (i == ctx.size()) break;
    }
  }
  s.default_row = make_row();
  return TableModel(std::move(s));
}

/// Every row puts 0.9 on one content token, 0.05 on EOS and spreads 0.05
/// over the remaining content tokens; reserved BOS/UNK/PAD get zero.
inline TableModel skewed_model(std::size_t vocab_size = 8) {
  TableModelSpec s;
  s.vocab = Vocabulary::synthetic(vocab_size);
  s.context_length = 1;
  const std::size_t v = vocab_size;
  const std::size_t n_content = v - kNumReserved;
  for (TokenId prev = 0; prev < v; ++prev) {
    std::vector<double> r(v, 0.0);
    const TokenId top = static_cast<TokenId>(kNumReserved + (prev % n_content));
    r[kEos] = 0.05;
    r[top] = 0.9;
    for (TokenId t = kNumReserved; t < v; ++t) {
      if (t != top) r[t] = 0.05 / static_cast<double>(n_content - 1);
    }
    s.rows.push_back({{prev}, r});
  }
  s.default_row = s.rows.front().probs;
  return TableModel(std::move(s));
}

/// Root: EOS 0.30, Token#0 0.40, Token#1 0.30; every later row splits evenly
/// between Token#0 and Token#1. Greedy emits Token#0, but every depth-2
/// path scores at most 0.4 * 0.5 = 0.2 < 0.3, so 2-LA emits EOS at once.
inline TableModel eos_bias_model() {
  TableModelSpec s;
  s.vocab = Vocabulary({"Token#0", "Token#1"});
  s.context_length = 1;
  const std::size_t v = s.vocab.size();
  s.rows.push_back({{kBos}, row(v, {{kEos, 0.30}, {kTok0, 0.40}, {kTok1, 0.30}})});
  s.default_row = row(v, {{kTok0, 0.5}, {kTok1, 0.5}});
  return TableModel(std::move(s));
}

struct Scored {
  std::vector<TokenId> tokens;
  double score = kNegInf;
};

/// Exhaustive MAP over all EOS-terminated sequences of length <= max_len
/// (ties: lexicographically smallest). Falls back to the best length-max_len
/// unfinished sequence when no finite finished sequence exists.
inline Scored brute_force_map(const TableModel& m, std::span<const TokenId> source, std::size_t max_len) {
  Scored best_done, best_open;
  std::vector<TokenId> prefix;
  auto better = [](const Scored& cur, double score, const std::vector<TokenId>& toks) {
    return score > cur.score || (score == cur.score && (cur.tokens.empty() || toks < cur.tokens));
  };
  std::function<void(const ModelState&, const std::vector<double>&, double)> rec =
      [&](const ModelState& st, const std::vector<double>& lps, double score) {
        for (TokenId t = 0; t < lps.size(); ++t) {
          if (lps[t] == kNegInf) continue;
          const double s = score + lps[t];
          prefix.push_back(t);
          if (t == kEos) {
            if (better(best_done, s, prefix)) best_done = {prefix, s};
          } else if (prefix.size() == max_len) {
            if (better(best_open, s, prefix)) best_open = {prefix, s};
          } else {
            auto next = m.step(st, t);
            rec(next.state, next.output.log_probs, s);
          }
          prefix.pop_back();
        }
      };
  auto first = m.step(m.init_state(source), kBos);
  rec(first.state, first.output.log_probs, 0.0);
  return best_done.score != kNegInf ? best_done : best_open;
}

/// All log-probabilities of `tokens` under `m`, for checking reported scores.
inline double sequence_log_prob(const TableModel& m, std::span<const TokenId> source, std::span<const TokenId> tokens) {
  auto cur = m.step(m.init_state(source), kBos);
  double s = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s += cur.output.log_probs[tokens[i]];
    if (i + 1 < tokens.size()) cur = m.step(cur.state, tokens[i]);
  }
  return s;
}

}  // namespace lookahead::testing
