#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lookahead/model.hpp"
#include "lookahead/table_model.hpp"

namespace lookahead {

/// Log-linear n-gram model: one logit vector per context bucket, next-token
/// distribution = softmax(logits[bucket(context)]).
///
/// Bucket 0 is the shared back-off bucket used for every context that was
/// not registered at construction. Each registered (n-1)-gram context owns
/// one further bucket. Order 1 has an empty context and a single bucket.
class NGramSoftmaxModel {
 public:
  NGramSoftmaxModel(Vocabulary vocab, std::size_t order, bool source_conditioned,
                    std::vector<std::vector<TokenId>> contexts = {})
      : vocab_(std::move(vocab)), order_(order), source_conditioned_(source_conditioned) {
    if (order_ < 1) throw UsageError("n-gram order must be >= 1");
    if (order_ > 1) {
      std::set<std::vector<TokenId>> seen;
      for (auto& c : contexts) {
        if (c.size() != order_ - 1) throw UsageError("n-gram context has the wrong length");
        for (TokenId t : c) {
          if (!vocab_.contains(t)) throw UsageError("n-gram context contains an out-of-range id");
        }
        if (seen.insert(c).second) contexts_.push_back(std::move(c));
      }
    }
    for (std::size_t i = 0; i < contexts_.size(); ++i) index_.emplace(contexts_[i], i + 1);
    logits_.assign(num_buckets() * vocab_.size(), 0.0);
    Fnv1a h;
    h.u64(0x6E6721);
    h.u64(order_);
    h.u64(source_conditioned_);
    for (const auto& t : vocab_.tokens()) h.bytes(t.data(), t.size() + 1);
    for (const auto& c : contexts_) {
      for (TokenId t : c) h.u64(t);
    }
    fingerprint_ = h.value();
    refresh();
  }

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t order() const noexcept { return order_; }
  bool source_conditioned() const noexcept { return source_conditioned_; }
  std::size_t num_buckets() const noexcept { return contexts_.size() + 1; }
  std::size_t num_parameters() const noexcept { return logits_.size(); }
  const std::vector<std::vector<TokenId>>& contexts() const noexcept { return contexts_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::span<const double> logits() const noexcept { return logits_; }
  std::span<const double> bucket_logits(std::size_t bucket) const {
    return std::span<const double>(logits_).subspan(bucket * vocab_.size(), vocab_.size());
  }

  /// Replaces all parameters (bucket-major, |V| logits per bucket).
  void set_logits(std::vector<double> logits) {
    if (logits.size() != logits_.size()) throw UsageError("logit vector has the wrong size");
    logits_ = std::move(logits);
    refresh();
  }

  std::size_t bucket_of(const std::vector<TokenId>& context) const {
    if (order_ == 1) return 0;
    auto it = index_.find(context);
    return it == index_.end() ? 0 : it->second;
  }

  const std::vector<double>& bucket_log_probs(std::size_t bucket) const { return log_probs_[bucket]; }

  ModelState init_state(std::span<const TokenId> source) const {
    detail::check_source(vocab_, source);
    return {fingerprint_, detail::initial_context(order_ - 1, source_conditioned_, source)};
  }

  StepResult step(const ModelState& state, TokenId token) const {
    if (state.owner != fingerprint_ || state.context.size() != order_ - 1) {
      throw UsageError("model state was not produced by this n-gram model");
    }
    if (!vocab_.contains(token)) throw UsageError("step token id out of range");
    ModelState next = state;
    detail::push_context(next.context, token);
    StepOutput out{log_probs_[bucket_of(next.context)]};
    return {std::move(next), std::move(out)};
  }

 private:
  void refresh() {
    const std::size_t v = vocab_.size();
    log_probs_.resize(num_buckets());
    for (std::size_t b = 0; b < num_buckets(); ++b) {
      log_probs_[b] = log_softmax(std::span<const double>(logits_).subspan(b * v, v));
    }
  }

  Vocabulary vocab_;
  std::size_t order_;
  bool source_conditioned_;
  std::vector<std::vector<TokenId>> contexts_;
  std::unordered_map<std::vector<TokenId>, std::size_t, ContextHash> index_;
  std::vector<double> logits_;
  std::vector<std::vector<double>> log_probs_;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace lookahead
