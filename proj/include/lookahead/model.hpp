#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lookahead/vocabulary.hpp"

namespace lookahead {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Conditioning context carried between decoder steps. `owner` is the
/// fingerprint of the model that produced it; `context` is the bounded
/// window of most recent token ids (oldest first).
struct ModelState {
  std::uint64_t owner = 0;
  std::vector<TokenId> context;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Natural-log next-token distribution over the full vocabulary.
struct StepOutput {
  std::vector<double> log_probs;
};

struct StepResult {
  ModelState state;
  StepOutput output;
};

/// Step-wise conditional model. Implementations are immutable, so
/// init_state/step may be called concurrently.
template <class M>
concept SequenceModel = requires(const M& m, const ModelState& s, std::span<const TokenId> src, TokenId t) {
  { m.vocabulary() } -> std::convertible_to<const Vocabulary&>;
  { m.init_state(src) } -> std::same_as<ModelState>;
  { m.step(s, t) } -> std::same_as<StepResult>;
};

inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline std::vector<double> log_softmax(std::span<const double> logits) {
  const double z = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - z;
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& x : out) x = std::exp(x);
  return out;
}

/// Argmax with ties resolved toward the lower id.
inline TokenId argmax_token(std::span<const double> log_probs) {
  TokenId best = 0;
  for (TokenId i = 1; i < log_probs.size(); ++i) {
    if (log_probs[i] > log_probs[best]) best = i;
  }
  return best;
}

/// Token ids ordered by descending log-prob; equal values keep ascending id.
inline std::vector<TokenId> sorted_by_log_prob(std::span<const double> log_probs) {
  std::vector<TokenId> order(log_probs.size());
  for (TokenId i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return log_probs[a] > log_probs[b]; });
  return order;
}

// 64-bit FNV-1a, used for model fingerprints, file checksums and config hashes.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
      bytes(&b, 1);
    }
  }
  void f64(double v) noexcept { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::span<const unsigned char> data) {
  Fnv1a h;
  h.bytes(data.data(), data.size());
  return h.value();
}

namespace detail {

// Shifts `tok` into a fixed-width context window.
inline void push_context(std::vector<TokenId>& ctx, TokenId tok) {
  if (ctx.empty()) return;
  std::shift_left(ctx.begin(), ctx.end(), 1);
  ctx.back() = tok;
}

// Initial window: BOS padding followed by the tail of `source` when
// source-conditioned, otherwise all BOS.
inline std::vector<TokenId> initial_context(std::size_t width, bool source_conditioned,
                                            std::span<const TokenId> source) {
  std::vector<TokenId> ctx(width, kBos);
  if (source_conditioned) {
    for (TokenId t : source) push_context(ctx, t);
  }
  return ctx;
}

inline void check_source(const Vocabulary& v, std::span<const TokenId> source) {
  for (TokenId t : source) {
    if (!v.contains(t)) throw DataError("source token id out of range: " + std::to_string(t));
  }
}

}  // namespace detail

}  // namespace lookahead
