#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lookahead/model.hpp"

namespace lookahead {

struct ContextHash {
  std::size_t operator()(const std::vector<TokenId>& ctx) const noexcept {
    Fnv1a h;
    for (TokenId t : ctx) h.u64(t);
    return static_cast<std::size_t>(h.value());
  }
};

struct TableRow {
  std::vector<TokenId> context;
  std::vector<double> probs;
};

/// Explicit next-token probabilities keyed by the last `context_length`
/// tokens. Contexts not listed fall back to `default_row`.
struct TableModelSpec {
  Vocabulary vocab;
  std::size_t context_length = 1;
  bool source_conditioned = false;
  std::vector<TableRow> rows;
  std::vector<double> default_row;
};

inline constexpr double kRowSumTolerance = 1e-12;

/// Exact probability-table backend. Zero entries become -inf log-probs.
class TableModel {
 public:
  explicit TableModel(TableModelSpec spec) : spec_(std::move(spec)) {
    const std::size_t v = spec_.vocab.size();
    validate_row(spec_.default_row, "default row");
    default_log_ = to_logs(spec_.default_row);
    Fnv1a h;
    h.u64(0x7AB1E);
    h.u64(spec_.context_length);
    h.u64(spec_.source_conditioned);
    for (const auto& t : spec_.vocab.tokens()) h.bytes(t.data(), t.size() + 1);
    for (const auto& row : spec_.rows) {
      if (row.context.size() != spec_.context_length) {
        throw UsageError("table row context length differs from the model's context length");
      }
      for (TokenId t : row.context) {
        if (t >= v) throw UsageError("table row context contains an out-of-range id");
      }
      validate_row(row.probs, "row");
      auto [it, inserted] = index_.emplace(row.context, log_rows_.size());
      if (!inserted) throw UsageError("duplicate table row context");
      log_rows_.push_back(to_logs(row.probs));
      for (TokenId t : row.context) h.u64(t);
      for (double p : row.probs) h.f64(p);
    }
    for (double p : spec_.default_row) h.f64(p);
    fingerprint_ = h.value();
  }

  const Vocabulary& vocabulary() const noexcept { return spec_.vocab; }
  const TableModelSpec& spec() const noexcept { return spec_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  ModelState init_state(std::span<const TokenId> source) const {
    detail::check_source(spec_.vocab, source);
    return {fingerprint_, detail::initial_context(spec_.context_length, spec_.source_conditioned, source)};
  }

  StepResult step(const ModelState& state, TokenId token) const {
    if (state.owner != fingerprint_ || state.context.size() != spec_.context_length) {
      throw UsageError("model state was not produced by this table model");
    }
    if (!spec_.vocab.contains(token)) throw UsageError("step token id out of range");
    ModelState next = state;
    detail::push_context(next.context, token);
    StepOutput out{row_for(next.context)};
    return {std::move(next), std::move(out)};
  }

  /// Log-probabilities used for `context` (listed row or the default).
  const std::vector<double>& row_for(const std::vector<TokenId>& context) const {
    auto it = index_.find(context);
    return it == index_.end() ? default_log_ : log_rows_[it->second];
  }

 private:
  void validate_row(const std::vector<double>& probs, const char* what) const {
    if (probs.size() != spec_.vocab.size()) {
      throw UsageError(std::string("table ") + what + " size differs from vocabulary size");
    }
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || p > 1.0) throw UsageError(std::string("table ") + what + " has an invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw UsageError(std::string("table ") + what + " does not sum to 1");
    }
  }

  static std::vector<double> to_logs(const std::vector<double>& probs) {
    std::vector<double> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
    return out;
  }

  TableModelSpec spec_;
  std::vector<double> default_log_;
  std::vector<std::vector<double>> log_rows_;
  std::unordered_map<std::vector<TokenId>, std::size_t, ContextHash> index_;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace lookahead
