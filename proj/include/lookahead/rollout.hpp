#pragma once

#include "lookahead/rng.hpp"
#include "lookahead/search.hpp"

namespace lookahead {

/// Sampling baseline for look-ahead: each candidate next token is scored by
/// its log-prob plus the mean log-likelihood of `n_rollouts` sampled
/// continuations of depth <= k-1. Deterministic for a given seed.
template <SequenceModel M>
DecodeResult rollout_decode(const M& model, std::span<const TokenId> source, const RolloutConfig& cfg) {
  if (cfg.k < 1) throw UsageError("rollout depth k must be >= 1");
  if (cfg.n_rollouts < 1) throw UsageError("n_rollouts must be >= 1");
  Rng rng(cfg.seed);
  return detail::emit_loop(
      model, source, detail::resolve_max_length(cfg.max_length, source.size()),
      [&](const ModelState& state, const std::vector<double>& lps, std::size_t remaining, SearchStats& stats) {
        const std::size_t depth = std::min(cfg.k, remaining);
        TokenId best = 0;
        double best_score = kNegInf;
        bool have = false;
        for (TokenId v = 0; v < lps.size(); ++v) {
          if (lps[v] == kNegInf) continue;
          double score = lps[v];
          if (depth > 1 && v != kEos) {
            const auto first = model.step(state, v);
            ++stats.nodes_expanded;
            double total = 0.0;
            for (std::size_t r = 0; r < cfg.n_rollouts; ++r) {
              const ModelState* cur_state = &first.state;
              const std::vector<double>* cur = &first.output.log_probs;
              StepResult scratch;
              double cont = 0.0;
              for (std::size_t d = 2; d <= depth; ++d) {
                const auto u = static_cast<TokenId>(rng.categorical_log(*cur));
                cont += (*cur)[u];
                if (u == kEos || d == depth) break;
                scratch = model.step(*cur_state, u);
                ++stats.nodes_expanded;
                cur_state = &scratch.state;
                cur = &scratch.output.log_probs;
              }
              total += cont;
              ++stats.leaves_evaluated;
            }
            score += total / static_cast<double>(cfg.n_rollouts);
          } else {
            ++stats.leaves_evaluated;
          }
          if (!have || score > best_score) {
            best = v;
            best_score = score;
            have = true;
          }
        }
        return best;
      });
}

}  // namespace lookahead
