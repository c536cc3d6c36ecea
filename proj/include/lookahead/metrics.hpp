#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <type_traits>
#include <utility>
#include <span>
#include <vector>

#include "lookahead/errors.hpp"

namespace lookahead {

inline constexpr std::size_t kBleuOrder = 4;
inline constexpr double kBleuSmoothingEpsilon = 0.1;

struct BucketScore {
  double bleu = 0.0;
  double avg_length_diff = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  double bleu = 0.0;  // [0, 100]
  std::array<double, kBleuOrder> n_gram_precisions{};
  double brevity_penalty = 1.0;
  double avg_length_diff = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  std::map<std::size_t, BucketScore> per_bucket;  // keyed by minimum reference length
};

struct BleuOptions {
  bool smooth = false;  // add kBleuSmoothingEpsilon to zero match counts
};

template <class Seq>
using TokenOf = std::remove_cvref_t<decltype(*std::begin(std::declval<const Seq&>()))>;

namespace detail {

template <class Seq>
void count_ngrams(const Seq& s, std::size_t n, std::map<std::vector<TokenOf<Seq>>, std::size_t>& out) {
  out.clear();
  const std::size_t len = std::size(s);
  if (len < n) return;
  for (std::size_t i = 0; i + n <= len; ++i) {
    out[std::vector<TokenOf<Seq>>(std::begin(s) + static_cast<std::ptrdiff_t>(i),
                                  std::begin(s) + static_cast<std::ptrdiff_t>(i + n))]++;
  }
}

}  // namespace detail

/// Corpus-level BLEU-4 over pre-tokenized sequences: clipped n-gram matches
/// and totals are pooled over the corpus, then combined as
/// 100 * BP * exp(mean_n log p_n) with BP = exp(1 - r/c) for c < r.
///
/// Any order with zero matches makes BLEU 0 unless `opts.smooth` is set. An
/// order for which neither side has any n-grams (every sentence shorter than
/// n) counts as precision 1, so identical corpora always score 100.
/// Only `avg_length_diff` is filled besides the BLEU fields; per-bucket
/// scores come from evaluate().
template <class Seq>
EvalReport corpus_bleu(std::span<const Seq> hypotheses, std::span<const Seq> references, BleuOptions opts = {}) {
  if (hypotheses.size() != references.size()) throw UsageError("hypothesis and reference counts differ");
  if (references.empty()) throw UsageError("BLEU needs at least one reference");

  std::array<double, kBleuOrder> matches{}, totals{}, ref_totals{};
  std::size_t c = 0, r = 0;
  std::map<std::vector<TokenOf<Seq>>, std::size_t> hyp_counts, ref_counts;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    const auto& ref = references[i];
    c += std::size(h);
    r += std::size(ref);
    for (std::size_t n = 1; n <= kBleuOrder; ++n) {
      detail::count_ngrams(h, n, hyp_counts);
      detail::count_ngrams(ref, n, ref_counts);
      for (const auto& [gram, cnt] : hyp_counts) {
        totals[n - 1] += static_cast<double>(cnt);
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += static_cast<double>(std::min(cnt, it->second));
      }
      for (const auto& kv : ref_counts) ref_totals[n - 1] += static_cast<double>(kv.second);
    }
  }

  EvalReport rep;
  rep.hypothesis_length = c;
  rep.reference_length = r;
  rep.avg_length_diff = (static_cast<double>(c) - static_cast<double>(r)) / static_cast<double>(hypotheses.size());

  if (c == 0) {
    rep.bleu = 0.0;
    rep.brevity_penalty = 0.0;
    return rep;
  }
  rep.brevity_penalty = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    double p;
    if (totals[n] == 0.0 && ref_totals[n] == 0.0) {
      p = 1.0;
    } else if (matches[n] == 0.0) {
      p = opts.smooth && totals[n] > 0.0 ? kBleuSmoothingEpsilon / totals[n] : 0.0;
    } else {
      p = matches[n] / totals[n];
    }
    rep.n_gram_precisions[n] = p;
    if (p <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  rep.bleu = zero ? 0.0 : 100.0 * rep.brevity_penalty * std::exp(log_sum / static_cast<double>(kBleuOrder));
  return rep;
}

/// Mean of len(hyp) - len(ref). Inputs must already exclude EOS.
template <class Seq>
double avg_length_diff(std::span<const Seq> hypotheses, std::span<const Seq> references) {
  if (hypotheses.size() != references.size()) throw UsageError("hypothesis and reference counts differ");
  if (hypotheses.empty()) throw UsageError("average length difference of an empty corpus");
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    sum += static_cast<double>(std::size(hypotheses[i])) - static_cast<double>(std::size(references[i]));
  }
  return sum / static_cast<double>(hypotheses.size());
}

/// Indices of the pairs whose reference has at least `min_len` tokens.
template <class Seq>
std::vector<std::size_t> filter_by_target_length(std::span<const Seq> references, std::size_t min_len) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (std::size(references[i]) >= min_len) keep.push_back(i);
  }
  return keep;
}

/// Full report: corpus BLEU, length difference and one entry per
/// minimum-reference-length bucket. Empty buckets get count 0 and zero scores.
template <class Seq>
EvalReport evaluate(std::span<const Seq> hypotheses, std::span<const Seq> references,
                    std::span<const std::size_t> min_lengths = {}, BleuOptions opts = {}) {
  EvalReport rep = corpus_bleu(hypotheses, references, opts);
  rep.avg_length_diff = avg_length_diff(hypotheses, references);
  for (std::size_t min_len : min_lengths) {
    const auto keep = filter_by_target_length(references, min_len);
    BucketScore b;
    b.count = keep.size();
    if (!keep.empty()) {
      std::vector<Seq> h, r;
      for (std::size_t i : keep) {
        h.push_back(hypotheses[i]);
        r.push_back(references[i]);
      }
      b.bleu = corpus_bleu(std::span<const Seq>(h), std::span<const Seq>(r), opts).bleu;
      b.avg_length_diff = avg_length_diff(std::span<const Seq>(h), std::span<const Seq>(r));
    }
    rep.per_bucket[min_len] = b;
  }
  return rep;
}

/// Copy of `seq` with every `eos` removed.
template <class T>
std::vector<T> strip_token(std::span<const T> seq, T eos) {
  std::vector<T> out;
  for (const T& t : seq) {
    if (t != eos) out.push_back(t);
  }
  return out;
}

}  // namespace lookahead
