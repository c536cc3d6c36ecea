#pragma once

#include "lookahead/search.hpp"

namespace lookahead {

/// Emits the most probable next token at every step (lower id on ties).
template <SequenceModel M>
DecodeResult greedy_decode(const M& model, std::span<const TokenId> source, std::size_t max_length = 0) {
  return detail::emit_loop(model, source, detail::resolve_max_length(max_length, source.size()),
                           [](const ModelState&, const std::vector<double>& lps, std::size_t, SearchStats& stats) {
                             ++stats.leaves_evaluated;
                             return argmax_token(lps);
                           });
}

}  // namespace lookahead
