#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "lookahead/model.hpp"

namespace lookahead {

struct SearchStats {
  std::uint64_t nodes_expanded = 0;    // model step calls
  std::uint64_t paths_pruned = 0;      // subtrees cut by the bound
  std::uint64_t leaves_evaluated = 0;  // completed depth-k or EOS paths
  double wall_time = 0.0;              // seconds

  SearchStats& operator+=(const SearchStats& o) {
    nodes_expanded += o.nodes_expanded;
    paths_pruned += o.paths_pruned;
    leaves_evaluated += o.leaves_evaluated;
    wall_time += o.wall_time;
    return *this;
  }
};

/// Output sequence with its log-likelihood. `tokens` ends in EOS unless the
/// length budget ran out first.
struct DecodeResult {
  std::vector<TokenId> tokens;
  double score = 0.0;
  std::vector<double> per_step_log_probs;
  // Look-ahead decoders only: score of the winning path at each emission step.
  std::vector<double> path_scores;
  SearchStats stats;

  bool finished() const { return !tokens.empty() && tokens.back() == kEos; }
};

/// Default length budget when none is configured.
inline std::size_t default_max_length(std::size_t source_length) { return 2 * source_length + 10; }

struct LookaheadConfig {
  std::size_t k = 1;
  std::size_t max_length = 0;  // 0 => default_max_length(|source|)
};

struct BeamConfig {
  std::size_t beam_width = 1;
  std::size_t max_length = 0;
};

struct RolloutConfig {
  std::size_t k = 1;
  std::size_t n_rollouts = 20;
  std::size_t max_length = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::size_t resolve_max_length(std::size_t configured, std::size_t source_length) {
  return configured == 0 ? default_max_length(source_length) : configured;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Shared emission loop: `choose` picks the next token given the current
// state and next-token distribution; the loop appends it, stops on EOS or
// at the length budget, and otherwise steps the model.
template <SequenceModel M, class Choose>
DecodeResult emit_loop(const M& model, std::span<const TokenId> source, std::size_t max_length, Choose&& choose) {
  if (max_length < 1) throw UsageError("max length must be >= 1");
  Stopwatch clock;
  DecodeResult out;
  auto [state, next] = model.step(model.init_state(source), kBos);
  ++out.stats.nodes_expanded;
  while (true) {
    const std::size_t remaining = max_length - out.tokens.size();
    const TokenId tok = choose(state, next.log_probs, remaining, out.stats);
    const double lp = next.log_probs[tok];
    out.tokens.push_back(tok);
    out.per_step_log_probs.push_back(lp);
    out.score += lp;
    if (tok == kEos || out.tokens.size() >= max_length) break;
    auto stepped = model.step(state, tok);
    ++out.stats.nodes_expanded;
    state = std::move(stepped.state);
    next = std::move(stepped.output);
  }
  out.stats.wall_time = clock.seconds();
  return out;
}

}  // namespace detail

}  // namespace lookahead
