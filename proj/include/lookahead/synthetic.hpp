#pragma once

#include <cmath>
#include <vector>

#include "lookahead/corpus.hpp"
#include "lookahead/rng.hpp"
#include "lookahead/table_model.hpp"

namespace lookahead {

/// Parameters of the synthetic parallel corpus.
///
/// Target lengths follow a discretized normal(mean_length, length_stddev)
/// clamped to >= 1. A small stddev makes EOS rise sharply near the end of
/// each sentence; a position-blind model trained on such data spreads that
/// mass over every position and so overestimates EOS early on.
struct SyntheticCorpusSpec {
  std::size_t vocab_size = 20;  // total |V| including the 4 reserved ids
  std::size_t context_length = 2;
  std::size_t n_sentences = 1000;
  double mean_length = 10.0;
  double length_stddev = 3.0;
  double peakedness = 0.6;  // mass of each row's preferred token
  bool source_conditioned = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (vocab_size < kNumReserved) throw UsageError("vocab_size must be >= 4");
    if (!(mean_length >= 1.0)) throw UsageError("mean_length must be >= 1");
    if (!(length_stddev >= 0.0)) throw UsageError("length_stddev must be >= 0");
    if (!(peakedness >= 0.0 && peakedness <= 1.0)) throw UsageError("peakedness must lie in [0, 1]");
    if (std::pow(static_cast<double>(vocab_size), static_cast<double>(context_length)) > 1e6) {
      throw UsageError("vocab_size^context_length is too large for a table model");
    }
  }
};

struct SyntheticCorpus {
  Corpus corpus;
  TableModel model;  // generating distribution (EOS mass = 1 / mean_length)
};

namespace detail {

// Ids that may appear inside a sentence.
inline std::vector<TokenId> content_ids(std::size_t vocab_size) {
  std::vector<TokenId> out;
  for (TokenId i = 0; i < vocab_size; ++i) {
    if (i != kBos && i != kEos && i != kPad) out.push_back(i);
  }
  return out;
}

inline std::vector<double> synthetic_row(Rng& rng, std::size_t v, std::span<const TokenId> content, double peakedness,
                                         double eos_mass) {
  std::vector<double> w(v, 0.0);
  const TokenId preferred = content[rng.below(content.size())];
  double rest = 0.0;
  for (TokenId t : content) {
    if (t == preferred) continue;
    const double u = rng.uniform();
    w[t] = u * u;
    rest += w[t];
  }
  const double content_mass = 1.0 - eos_mass;
  const double other_share = content.size() > 1 ? 1.0 - peakedness : 0.0;
  for (TokenId t : content) {
    if (t == preferred) continue;
    w[t] = rest > 0.0 ? content_mass * other_share * w[t] / rest : 0.0;
  }
  w[preferred] = content_mass * (rest > 0.0 ? 1.0 - other_share : 1.0);
  w[kEos] = eos_mass;
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace detail

inline std::size_t sample_length(Rng& rng, double mean, double stddev) {
  const double x = std::round(mean + stddev * rng.normal());
  return x < 1.0 ? 1 : static_cast<std::size_t>(x);
}

/// Samples a ground-truth table model, then sentence pairs from it. The
/// source is uniform over content tokens; the target has the same length
/// as the source and is drawn from the model's content distribution.
inline SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t v = spec.vocab_size;
  const auto content = detail::content_ids(v);
  const double eos_mass = 1.0 / spec.mean_length;

  TableModelSpec ts;
  ts.vocab = Vocabulary::synthetic(v);
  ts.context_length = spec.context_length;
  ts.source_conditioned = spec.source_conditioned;
  std::vector<TokenId> ctx(spec.context_length, 0);
  while (true) {
    ts.rows.push_back({ctx, detail::synthetic_row(rng, v, content, spec.peakedness, eos_mass)});
    std::size_t i = 0;
    while (i < ctx.size() && ++ctx[ctx.size() - 1 - i] == v) ctx[ctx.size() - 1 - i++] = 0;
    if (i == ctx.size()) break;
  }
  if (spec.context_length == 0) {
    ts.default_row = ts.rows.front().probs;
    ts.rows.clear();
  } else {
    ts.default_row = detail::synthetic_row(rng, v, content, spec.peakedness, eos_mass);
  }
  TableModel model(std::move(ts));

  Corpus corpus;
  corpus.vocab = model.vocabulary();
  std::vector<double> weights(v);
  for (std::size_t s = 0; s < spec.n_sentences; ++s) {
    SentencePair pair;
    const std::size_t len = sample_length(rng, spec.mean_length, spec.length_stddev);
    for (std::size_t i = 0; i < len; ++i) pair.source.push_back(content[rng.below(content.size())]);
    auto cur = model.step(model.init_state(pair.source), kBos);
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = 0; j < v; ++j) weights[j] = j == kEos ? 0.0 : std::exp(cur.output.log_probs[j]);
      const auto tok = static_cast<TokenId>(rng.categorical(weights));
      pair.target.push_back(tok);
      if (i + 1 < len) cur = model.step(cur.state, tok);
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return {std::move(corpus), std::move(model)};
}

}  // namespace lookahead
