#pragma once

#include <variant>

#include "lookahead/ngram_model.hpp"
#include "lookahead/table_model.hpp"

namespace lookahead {

enum class Backend : std::uint8_t { kTable = 1, kNGram = 2 };

/// Either backend behind one value type; used where the backend is only
/// known at run time (model files, the CLI).
class AnyModel {
 public:
  AnyModel(TableModel m) : impl_(std::move(m)) {}        // NOLINT(google-explicit-constructor)
  AnyModel(NGramSoftmaxModel m) : impl_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  Backend backend() const noexcept {
    return std::holds_alternative<TableModel>(impl_) ? Backend::kTable : Backend::kNGram;
  }

  const Vocabulary& vocabulary() const {
    return std::visit([](const auto& m) -> const Vocabulary& { return m.vocabulary(); }, impl_);
  }
  ModelState init_state(std::span<const TokenId> source) const {
    return std::visit([&](const auto& m) { return m.init_state(source); }, impl_);
  }
  StepResult step(const ModelState& state, TokenId token) const {
    return std::visit([&](const auto& m) { return m.step(state, token); }, impl_);
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), impl_);
  }

  const TableModel* as_table() const noexcept { return std::get_if<TableModel>(&impl_); }
  const NGramSoftmaxModel* as_ngram() const noexcept { return std::get_if<NGramSoftmaxModel>(&impl_); }

 private:
  std::variant<TableModel, NGramSoftmaxModel> impl_;
};

static_assert(SequenceModel<TableModel>);
static_assert(SequenceModel<NGramSoftmaxModel>);
static_assert(SequenceModel<AnyModel>);

}  // namespace lookahead
