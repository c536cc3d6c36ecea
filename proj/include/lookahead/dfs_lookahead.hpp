#pragma once

#include <cmath>
#include <optional>

#include "lookahead/search.hpp"

namespace lookahead {

/// Enumeration guard for the exhaustive look-ahead oracle.
inline constexpr double kOracleMaxPaths = 1e6;

namespace detail {

// Best look-ahead path seen so far at one emission step. Ties on score go
// to the lower depth-1 token id.
struct Incumbent {
  double score = kNegInf;
  std::optional<TokenId> head;

  bool offer(double candidate, TokenId h) {
    if (!head || candidate > score || (candidate == score && h < *head)) {
      score = candidate;
      head = h;
      return true;
    }
    return false;
  }
};

// Depth-first branch and bound over continuations. Children are visited in
// descending log-prob order, so once `cum` drops below the incumbent no later
// sibling can do better and the loop breaks.
template <SequenceModel M>
class DfsLookahead {
 public:
  DfsLookahead(const M& model, std::size_t depth_limit, SearchStats& stats)
      : model_(model), depth_limit_(depth_limit), stats_(stats) {}

  TokenId run(const ModelState& state, const std::vector<double>& log_probs) {
    expand(state, log_probs, 1, 0.0, 0);
    return *best_.head;
  }

  double best_score() const { return best_.score; }

 private:
  void expand(const ModelState& state, const std::vector<double>& log_probs, std::size_t depth, double cum,
              TokenId head) {
    if (depth == depth_limit_) {
      // Every child here is a leaf, so only the first one in sorted order
      // can matter.
      const TokenId tok = argmax_token(log_probs);
      const double path = cum + log_probs[tok];
      if (best_.head && path < best_.score) {
        stats_.paths_pruned += log_probs.size();
        return;
      }
      ++stats_.leaves_evaluated;
      best_.offer(path, depth == 1 ? tok : head);
      return;
    }
    const auto order = sorted_by_log_prob(log_probs);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const TokenId tok = order[i];
      const double path = cum + log_probs[tok];
      if (best_.head && path < best_.score) {
        stats_.paths_pruned += order.size() - i;
        break;
      }
      const TokenId h = depth == 1 ? tok : head;
      if (depth == depth_limit_ || tok == kEos) {
        ++stats_.leaves_evaluated;
        best_.offer(path, h);
        break;
      }
      auto child = model_.step(state, tok);
      ++stats_.nodes_expanded;
      expand(child.state, child.output.log_probs, depth + 1, path, h);
    }
  }

  const M& model_;
  std::size_t depth_limit_;
  SearchStats& stats_;
  Incumbent best_;
};

// Exhaustive reference: every path to depth k (or EOS), no pruning.
template <SequenceModel M>
class ExhaustiveLookahead {
 public:
  ExhaustiveLookahead(const M& model, std::size_t depth_limit, SearchStats& stats)
      : model_(model), depth_limit_(depth_limit), stats_(stats) {}

  TokenId run(const ModelState& state, const std::vector<double>& log_probs) {
    expand(state, log_probs, 1, 0.0, 0);
    return *best_.head;
  }

  double best_score() const { return best_.score; }

 private:
  void expand(const ModelState& state, const std::vector<double>& log_probs, std::size_t depth, double cum,
              TokenId head) {
    for (TokenId tok = 0; tok < log_probs.size(); ++tok) {
      const double path = cum + log_probs[tok];
      const TokenId h = depth == 1 ? tok : head;
      if (depth == depth_limit_ || tok == kEos) {
        ++stats_.leaves_evaluated;
        best_.offer(path, h);
        continue;
      }
      auto child = model_.step(state, tok);
      ++stats_.nodes_expanded;
      expand(child.state, child.output.log_probs, depth + 1, path, h);
    }
  }

  const M& model_;
  std::size_t depth_limit_;
  SearchStats& stats_;
  Incumbent best_;
};

inline void check_lookahead(const LookaheadConfig& cfg) {
  if (cfg.k < 1) throw UsageError("look-ahead depth k must be >= 1");
}

}  // namespace detail

/// k-step look-ahead decoding: at every emission step, search continuations
/// up to depth k (stopping at EOS) and emit the first token of the path with
/// the largest summed log-probability. The depth is capped by the remaining
/// length budget.
template <SequenceModel M>
DecodeResult lookahead_decode(const M& model, std::span<const TokenId> source, const LookaheadConfig& cfg) {
  detail::check_lookahead(cfg);
  std::vector<double> path_scores;
  auto out = detail::emit_loop(
      model, source, detail::resolve_max_length(cfg.max_length, source.size()),
      [&](const ModelState& state, const std::vector<double>& lps, std::size_t remaining, SearchStats& stats) {
        detail::DfsLookahead<M> search(model, std::min(cfg.k, remaining), stats);
        const TokenId tok = search.run(state, lps);
        path_scores.push_back(search.best_score());
        return tok;
      });
  out.path_scores = std::move(path_scores);
  return out;
}

/// Same selection rule as lookahead_decode, by full enumeration.
/// Throws CapacityError when |V|^k exceeds kOracleMaxPaths.
template <SequenceModel M>
DecodeResult lookahead_oracle(const M& model, std::span<const TokenId> source, const LookaheadConfig& cfg) {
  detail::check_lookahead(cfg);
  const double paths = std::pow(static_cast<double>(model.vocabulary().size()), static_cast<double>(cfg.k));
  if (paths > kOracleMaxPaths) {
    throw CapacityError("look-ahead oracle would enumerate more than 1e6 paths per step");
  }
  std::vector<double> path_scores;
  auto out = detail::emit_loop(
      model, source, detail::resolve_max_length(cfg.max_length, source.size()),
      [&](const ModelState& state, const std::vector<double>& lps, std::size_t remaining, SearchStats& stats) {
        detail::ExhaustiveLookahead<M> search(model, std::min(cfg.k, remaining), stats);
        const TokenId tok = search.run(state, lps);
        path_scores.push_back(search.best_score());
        return tok;
      });
  out.path_scores = std::move(path_scores);
  return out;
}

}  // namespace lookahead
