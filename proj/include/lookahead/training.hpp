#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lookahead/corpus.hpp"
#include "lookahead/ngram_model.hpp"
#include "lookahead/rng.hpp"

namespace lookahead {

/// One prediction: `target` given the (order-1)-token window `context`.
struct TrainingEvent {
  std::vector<TokenId> context;
  TokenId target = 0;

  friend bool operator==(const TrainingEvent&, const TrainingEvent&) = default;
};

using Batch = std::vector<TrainingEvent>;

struct TrainConfig {
  double gamma = 0.0;  // weight of the auxiliary EOS loss
  double learning_rate = 0.1;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  TokenId eos_id = kEos;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 10.0)) throw UsageError("gamma must lie in [0, 10]");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning_rate must be > 0");
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  }
};

struct EpochLoss {
  std::size_t epoch = 0;
  double nll = 0.0;
  double eos_loss = 0.0;
  double total = 0.0;
};

struct TrainResult {
  NGramSoftmaxModel model;
  std::vector<EpochLoss> trace;
};

/// Events for one sentence pair: the target tokens followed by EOS, each
/// conditioned on the window the decoder would see at that point.
inline void append_events(Batch& out, std::size_t order, bool source_conditioned, const SentencePair& pair) {
  auto ctx = detail::initial_context(order - 1, source_conditioned, pair.source);
  detail::push_context(ctx, kBos);
  for (TokenId t : pair.target) {
    out.push_back({ctx, t});
    detail::push_context(ctx, t);
  }
  out.push_back({ctx, kEos});
}

inline Batch extract_events(std::size_t order, bool source_conditioned, std::span<const SentencePair> pairs) {
  if (order < 1) throw UsageError("n-gram order must be >= 1");
  Batch out;
  for (const auto& p : pairs) append_events(out, order, source_conditioned, p);
  return out;
}

/// Untrained (all-zero logits) model with one bucket per context observed in `pairs`.
inline NGramSoftmaxModel make_ngram_model(const Vocabulary& vocab, std::size_t order, bool source_conditioned,
                                          std::span<const SentencePair> pairs) {
  std::vector<std::vector<TokenId>> contexts;
  for (auto& e : extract_events(order, source_conditioned, pairs)) contexts.push_back(std::move(e.context));
  return NGramSoftmaxModel(vocab, order, source_conditioned, std::move(contexts));
}

namespace detail {

inline void check_batch(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch) {
  if (batch.empty()) throw UsageError("batch must not be empty");
  for (const auto& e : batch) {
    if (!model.vocabulary().contains(e.target)) throw UsageError("event target id out of range");
  }
}

inline constexpr double kMaxEosProb = 1.0 - 1e-12;

// -log(1 - p_eos), with p_eos clamped away from 1.
inline double eos_term(double p_eos) { return -std::log1p(-std::min(p_eos, kMaxEosProb)); }

struct LossParts {
  double nll = 0.0;
  double eos = 0.0;
};

inline LossParts loss_parts(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch, TokenId eos_id) {
  LossParts parts;
  for (const auto& e : batch) {
    const auto& lp = model.bucket_log_probs(model.bucket_of(e.context));
    parts.nll -= lp[e.target];
    if (e.target != eos_id) parts.eos += eos_term(std::exp(lp[eos_id]));
  }
  return parts;
}

// Adds d(loss)/d(logits) of one event into `grad` (|V| entries of its bucket).
inline void accumulate_event_gradient(std::span<const double> probs, TokenId target, TokenId eos_id, double gamma,
                                      std::span<double> grad) {
  for (std::size_t j = 0; j < probs.size(); ++j) grad[j] += probs[j];
  grad[target] -= 1.0;
  if (gamma != 0.0 && target != eos_id) {
    const double pe = probs[eos_id];
    const double scale = gamma * pe / std::max(1.0 - pe, 1.0 - kMaxEosProb);
    for (std::size_t j = 0; j < probs.size(); ++j) grad[j] -= scale * probs[j];
    grad[eos_id] += scale;
  }
}

}  // namespace detail

/// Sum over events of -log P(target | context).
inline double nll_loss(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch) {
  detail::check_batch(model, batch);
  return detail::loss_parts(model, batch, kEos).nll;
}

/// Sum over non-EOS-target events of -log(1 - P_EOS); EOS-target events add 0.
inline double eos_aux_loss(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch,
                           TokenId eos_id = kEos) {
  detail::check_batch(model, batch);
  const double loss = detail::loss_parts(model, batch, eos_id).eos;
  if (!std::isfinite(loss)) throw NumericError("auxiliary EOS loss is not finite");
  return loss;
}

inline double total_loss(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch, double gamma,
                         TokenId eos_id = kEos) {
  if (!(gamma >= 0.0)) throw UsageError("gamma must be >= 0");
  detail::check_batch(model, batch);
  const auto parts = detail::loss_parts(model, batch, eos_id);
  return parts.nll + gamma * parts.eos;
}

/// Analytic gradient of total_loss with respect to every logit
/// (bucket-major, same layout as NGramSoftmaxModel::logits()).
inline std::vector<double> loss_gradient(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch,
                                         double gamma, TokenId eos_id = kEos) {
  detail::check_batch(model, batch);
  const std::size_t v = model.vocabulary().size();
  std::vector<double> grad(model.num_parameters(), 0.0);
  std::vector<double> probs(v);
  for (const auto& e : batch) {
    const std::size_t b = model.bucket_of(e.context);
    const auto& lp = model.bucket_log_probs(b);
    for (std::size_t j = 0; j < v; ++j) probs[j] = std::exp(lp[j]);
    detail::accumulate_event_gradient(probs, e.target, eos_id, gamma, std::span<double>(grad).subspan(b * v, v));
  }
  return grad;
}

/// Mini-batch gradient descent on nll + gamma * eos_aux with a constant step.
/// Event order is reshuffled every epoch from `cfg.seed`. The trace holds the
/// full-corpus losses after each epoch.
inline TrainResult train(NGramSoftmaxModel model, std::span<const TrainingEvent> events, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_batch(model, events);
  const std::size_t v = model.vocabulary().size();
  if (cfg.eos_id >= v) throw UsageError("eos_id out of range");

  std::vector<std::size_t> buckets(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) buckets[i] = model.bucket_of(events[i].context);

  std::vector<double> logits(model.logits().begin(), model.logits().end());
  std::vector<double> grad(logits.size(), 0.0);
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> touched;
  std::vector<char> is_touched(model.num_buckets(), 0);
  std::vector<double> probs(v);
  Rng rng(cfg.seed);

  TrainResult result{model, {}};
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t ev = order[i];
        const std::size_t b = buckets[ev];
        const auto row = std::span<const double>(logits).subspan(b * v, v);
        const double z = log_sum_exp(row);
        for (std::size_t j = 0; j < v; ++j) probs[j] = std::exp(row[j] - z);
        detail::accumulate_event_gradient(probs, events[ev].target, cfg.eos_id, cfg.gamma,
                                          std::span<double>(grad).subspan(b * v, v));
        if (!is_touched[b]) {
          is_touched[b] = 1;
          touched.push_back(b);
        }
      }
      std::sort(touched.begin(), touched.end());
      for (std::size_t b : touched) {
        for (std::size_t j = b * v; j < (b + 1) * v; ++j) {
          logits[j] -= cfg.learning_rate * grad[j];
          grad[j] = 0.0;
        }
        is_touched[b] = 0;
      }
      touched.clear();
    }
    result.model.set_logits(logits);
    const auto parts = detail::loss_parts(result.model, events, cfg.eos_id);
    const double total = parts.nll + cfg.gamma * parts.eos;
    if (!std::isfinite(total)) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                          " (loss is not finite; try a smaller learning_rate)");
    }
    result.trace.push_back({epoch, parts.nll, parts.eos, total});
  }
  return result;
}

inline TrainResult train(NGramSoftmaxModel model, std::span<const SentencePair> corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw UsageError("training corpus must not be empty");
  const auto events = extract_events(model.order(), model.source_conditioned(), corpus);
  return train(std::move(model), events, cfg);
}

/// Max over parameters of |analytic - central difference| / max(1, |analytic|, |fd|).
inline double grad_check(const NGramSoftmaxModel& model, std::span<const TrainingEvent> batch, double gamma,
                         double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw UsageError("epsilon must lie in [1e-7, 1e-3]");
  const auto analytic = loss_gradient(model, batch, gamma);
  NGramSoftmaxModel probe = model;
  std::vector<double> theta(model.logits().begin(), model.logits().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + epsilon;
    probe.set_logits(theta);
    const double up = total_loss(probe, batch, gamma);
    theta[i] = saved - epsilon;
    probe.set_logits(theta);
    const double down = total_loss(probe, batch, gamma);
    theta[i] = saved;
    const double fd = (up - down) / (2.0 * epsilon);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

}  // namespace lookahead
