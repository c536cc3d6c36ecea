#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lookahead/errors.hpp"

namespace lookahead {

using TokenId = std::uint32_t;

// Reserved ids are fixed so that model files and fixtures are bit-exact.
inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kUnk = 2;
inline constexpr TokenId kPad = 3;
inline constexpr std::size_t kNumReserved = 4;

inline constexpr std::string_view kBosText = "<bos>";
inline constexpr std::string_view kEosText = "<eos>";
inline constexpr std::string_view kUnkText = "<unk>";
inline constexpr std::string_view kPadText = "<pad>";

/// Dense token <-> id bijection. Ids 0..3 are always BOS, EOS, UNK, PAD.
class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  /// Builds a vocabulary from content tokens; reserved tokens are prepended.
  /// Duplicates and reserved spellings among `content` are ignored.
  explicit Vocabulary(const std::vector<std::string>& content) {
    for (auto t : {kBosText, kEosText, kUnkText, kPadText}) push(std::string(t));
    for (const auto& t : content) {
      if (!index_.contains(t)) push(t);
    }
  }

  /// Rebuilds from a full ordered token list (as stored in a model file).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < kNumReserved || tokens[kBos] != kBosText || tokens[kEos] != kEosText ||
        tokens[kUnk] != kUnkText || tokens[kPad] != kPadText) {
      throw FormatError("vocabulary block does not start with the reserved tokens");
    }
    Vocabulary v;
    for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
      if (v.index_.contains(tokens[i])) throw FormatError("duplicate token in vocabulary: " + tokens[i]);
      v.push(tokens[i]);
    }
    return v;
  }

  /// Synthetic vocabulary of the given total size: reserved tokens plus w4, w5, ...
  static Vocabulary synthetic(std::size_t total_size) {
    if (total_size < kNumReserved) throw UsageError("vocabulary size must be >= 4");
    std::vector<std::string> content;
    for (std::size_t i = kNumReserved; i < total_size; ++i) content.push_back("w" + std::to_string(i));
    return Vocabulary(content);
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(TokenId id) const noexcept { return id < tokens_.size(); }

  const std::string& token(TokenId id) const {
    if (!contains(id)) throw UsageError("token id out of range: " + std::to_string(id));
    return tokens_[id];
  }

  /// Unknown strings map to UNK.
  TokenId id(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    return it == index_.end() ? kUnk : it->second;
  }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void push(std::string t) {
    index_.emplace(t, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace lookahead
