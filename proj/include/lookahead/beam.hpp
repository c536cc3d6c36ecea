#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "lookahead/search.hpp"

namespace lookahead {

struct BeamResult {
  DecodeResult best;
  std::vector<DecodeResult> n_best;  // final beam, best first
};

namespace detail {

struct BeamHyp {
  std::vector<TokenId> tokens;
  std::vector<double> log_probs;
  double score = 0.0;
  ModelState state;
  std::vector<double> next;  // distribution over the following token
  bool done = false;
};

}  // namespace detail

/// Length-unnormalized beam search. Finished hypotheses stay in the beam
/// and keep using its budget; the search stops when every hypothesis in the
/// beam has finished or hit the length budget.
template <SequenceModel M>
BeamResult beam_decode(const M& model, std::span<const TokenId> source, const BeamConfig& cfg) {
  if (cfg.beam_width < 1) throw UsageError("beam width must be >= 1");
  const std::size_t max_length = detail::resolve_max_length(cfg.max_length, source.size());
  detail::Stopwatch clock;
  SearchStats stats;

  std::vector<detail::BeamHyp> beam(1);
  {
    auto first = model.step(model.init_state(source), kBos);
    ++stats.nodes_expanded;
    beam[0].state = std::move(first.state);
    beam[0].next = std::move(first.output.log_probs);
  }

  struct Candidate {
    double score;
    std::size_t parent;
    std::optional<TokenId> token;  // empty: carry a finished hypothesis over
  };
  std::vector<Candidate> cands;

  while (std::ranges::any_of(beam, [](const auto& h) { return !h.done; })) {
    cands.clear();
    for (std::size_t i = 0; i < beam.size(); ++i) {
      const auto& h = beam[i];
      if (h.done) {
        cands.push_back({h.score, i, std::nullopt});
        continue;
      }
      for (TokenId v = 0; v < h.next.size(); ++v) {
        if (h.next[v] == kNegInf) continue;
        cands.push_back({h.score + h.next[v], i, v});
      }
    }
    const std::size_t keep = std::min(cfg.beam_width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token.value_or(0) < b.token.value_or(0);
                      });

    std::vector<detail::BeamHyp> next_beam;
    next_beam.reserve(keep);
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& cand = cands[c];
      const auto& parent = beam[cand.parent];
      if (!cand.token) {
        next_beam.push_back(parent);
        continue;
      }
      detail::BeamHyp h;
      h.tokens = parent.tokens;
      h.log_probs = parent.log_probs;
      h.tokens.push_back(*cand.token);
      h.log_probs.push_back(parent.next[*cand.token]);
      h.score = cand.score;
      if (*cand.token == kEos || h.tokens.size() >= max_length) {
        h.done = true;
        ++stats.leaves_evaluated;
      } else {
        auto stepped = model.step(parent.state, *cand.token);
        ++stats.nodes_expanded;
        h.state = std::move(stepped.state);
        h.next = std::move(stepped.output.log_probs);
      }
      next_beam.push_back(std::move(h));
    }
    beam = std::move(next_beam);
  }

  // The beam is already ordered by (score desc, parent rank, token).
  BeamResult out;
  for (auto& h : beam) {
    DecodeResult r;
    r.tokens = std::move(h.tokens);
    r.per_step_log_probs = std::move(h.log_probs);
    r.score = h.score;
    out.n_best.push_back(std::move(r));
  }
  std::stable_partition(out.n_best.begin(), out.n_best.end(), [](const DecodeResult& r) { return r.finished(); });
  out.best = out.n_best.front();
  stats.wall_time = clock.seconds();
  out.best.stats = stats;
  return out;
}

}  // namespace lookahead
