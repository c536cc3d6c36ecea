#pragma once

#include <algorithm>
#include <fstream>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lookahead/vocabulary.hpp"

namespace lookahead {

struct SentencePair {
  std::vector<TokenId> source;
  std::vector<TokenId> target;  // without EOS

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

enum class TokenizeMode { kWhitespace, kCharacter };

inline TokenizeMode parse_tokenize_mode(std::string_view s) {
  if (s == "whitespace" || s == "word") return TokenizeMode::kWhitespace;
  if (s == "character" || s == "char") return TokenizeMode::kCharacter;
  throw UsageError("unknown tokenization mode: " + std::string(s));
}

inline std::string_view to_string(TokenizeMode m) {
  return m == TokenizeMode::kWhitespace ? "whitespace" : "character";
}

struct Corpus {
  std::vector<SentencePair> pairs;
  TokenizeMode mode = TokenizeMode::kWhitespace;
  Vocabulary vocab;
};

/// Whitespace mode splits on runs of spaces/tabs. Character mode yields one
/// token per UTF-8 code point and drops whitespace ("ab c" -> a, b, c).
inline std::vector<std::string> tokenize(std::string_view line, TokenizeMode mode) {
  std::vector<std::string> out;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; };
  if (mode == TokenizeMode::kWhitespace) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      const std::size_t start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    const auto lead = static_cast<unsigned char>(line[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, line.size() - i);
    if (!(len == 1 && is_space(line[i]))) out.emplace_back(line.substr(i, len));
    i += len;
  }
  return out;
}

inline std::vector<TokenId> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

/// Space-joined token strings; EOS and other reserved ids are dropped.
inline std::string decode_text(std::span<const TokenId> ids, const Vocabulary& vocab, TokenizeMode mode) {
  std::string out;
  for (TokenId id : ids) {
    if (id == kEos || id == kBos || id == kPad) continue;
    if (!out.empty() && mode == TokenizeMode::kWhitespace) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

/// Parallel corpus from one-sentence-per-line files. Without `vocab` a new
/// vocabulary is built in order of first appearance; with it, unknown
/// tokens map to UNK.
inline Corpus load_corpus(const std::string& source_path, const std::string& target_path, TokenizeMode mode,
                          std::optional<Vocabulary> vocab = std::nullopt) {
  const auto src = read_lines(source_path);
  const auto tgt = read_lines(target_path);
  if (src.size() != tgt.size()) {
    throw IngestionError("source has " + std::to_string(src.size()) + " lines but target has " +
                             std::to_string(tgt.size()),
                         std::min(src.size(), tgt.size()) + 1);
  }
  std::vector<std::vector<std::string>> src_tok, tgt_tok;
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_tok.push_back(tokenize(src[i], mode));
    tgt_tok.push_back(tokenize(tgt[i], mode));
    if (tgt_tok.back().empty()) throw IngestionError("empty target sentence", i + 1);
  }
  Corpus c;
  c.mode = mode;
  if (vocab) {
    c.vocab = std::move(*vocab);
  } else {
    std::vector<std::string> content;
    for (std::size_t i = 0; i < src.size(); ++i) {
      content.insert(content.end(), src_tok[i].begin(), src_tok[i].end());
      content.insert(content.end(), tgt_tok[i].begin(), tgt_tok[i].end());
    }
    c.vocab = Vocabulary(content);
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    c.pairs.push_back({encode(src_tok[i], c.vocab), encode(tgt_tok[i], c.vocab)});
  }
  return c;
}

/// Source-only file (decode input).
inline std::vector<std::vector<TokenId>> load_sources(const std::string& path, TokenizeMode mode,
                                                      const Vocabulary& vocab) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& line : read_lines(path)) out.push_back(encode(tokenize(line, mode), vocab));
  return out;
}

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw DataError("failed writing file: " + path);
}

inline void write_corpus(const std::vector<SentencePair>& pairs, const Vocabulary& vocab, TokenizeMode mode,
                         const std::string& source_path, const std::string& target_path) {
  std::vector<std::string> s, t;
  for (const auto& p : pairs) {
    s.push_back(decode_text(p.source, vocab, mode));
    t.push_back(decode_text(p.target, vocab, mode));
  }
  write_lines(source_path, s);
  write_lines(target_path, t);
}

}  // namespace lookahead
