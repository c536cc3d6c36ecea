#pragma once

// Model container, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "LKAM"
//   4       4     u32 format version (kModelFormatVersion)
//   8       4     u32 vocabulary size V
//           ...   V x { u32 byte length, UTF-8 bytes }   (ids 0..3 are reserved)
//           1     u8 backend tag (1 = table, 2 = n-gram)
//   table:  u32 context_length, u8 source_conditioned, u32 row count R,
//           R x { context_length x u32 ids, V x f64 probabilities },
//           V x f64 default row
//   n-gram: u32 order, u8 source_conditioned, u32 context count C,
//           C x { (order-1) x u32 ids },
//           (C + 1) x V x f64 logits (bucket 0 = back-off)
//           8     u64 FNV-1a checksum of every preceding byte
//
// f64 values are stored as their IEEE-754 bit pattern, so a round trip is
// bit-exact.

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lookahead/any_model.hpp"

namespace lookahead {

inline constexpr std::array<char, 4> kModelMagic{'L', 'K', 'A', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint32_t u32() {
    auto p = need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto p = need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    auto p = need(n);
    return std::string(reinterpret_cast<const char*>(p.data()), n);
  }
  std::span<const std::uint8_t> need(std::size_t n) {
    if (data_.size() - pos_ < n) throw FormatError("model stream is truncated");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Guards allocation sizes read from an untrusted stream.
inline std::size_t checked_count(std::uint64_t count, std::size_t elem_bytes, const ByteReader& r) {
  if (elem_bytes != 0 && count > r.remaining() / elem_bytes) throw FormatError("model stream is truncated");
  return static_cast<std::size_t>(count);
}

inline void write_table(ByteWriter& w, const TableModel& m) {
  const auto& s = m.spec();
  w.u32(static_cast<std::uint32_t>(s.context_length));
  w.u8(s.source_conditioned ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.rows.size()));
  for (const auto& row : s.rows) {
    for (TokenId t : row.context) w.u32(t);
    for (double p : row.probs) w.f64(p);
  }
  for (double p : s.default_row) w.f64(p);
}

inline void write_ngram(ByteWriter& w, const NGramSoftmaxModel& m) {
  w.u32(static_cast<std::uint32_t>(m.order()));
  w.u8(m.source_conditioned() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(m.contexts().size()));
  for (const auto& c : m.contexts()) {
    for (TokenId t : c) w.u32(t);
  }
  for (double x : m.logits()) w.f64(x);
}

inline TableModel read_table(ByteReader& r, Vocabulary vocab) {
  TableModelSpec s;
  const std::size_t v = vocab.size();
  s.vocab = std::move(vocab);
  s.context_length = r.u32();
  s.source_conditioned = r.u8() != 0;
  const std::size_t rows = checked_count(r.u32(), 4 * s.context_length + 8 * v, r);
  s.rows.resize(rows);
  for (auto& row : s.rows) {
    row.context.resize(s.context_length);
    for (auto& t : row.context) t = r.u32();
    row.probs.resize(v);
    for (auto& p : row.probs) p = r.f64();
  }
  checked_count(v, 8, r);
  s.default_row.resize(v);
  for (auto& p : s.default_row) p = r.f64();
  try {
    return TableModel(std::move(s));
  } catch (const UsageError& e) {
    throw FormatError(std::string("invalid table parameters: ") + e.what());
  }
}

inline NGramSoftmaxModel read_ngram(ByteReader& r, Vocabulary vocab) {
  const std::size_t v = vocab.size();
  const std::size_t order = r.u32();
  if (order < 1) throw FormatError("n-gram order must be >= 1");
  const bool src = r.u8() != 0;
  const std::size_t n_ctx = checked_count(r.u32(), 4 * (order - 1) + 8 * v, r);
  std::vector<std::vector<TokenId>> contexts(n_ctx, std::vector<TokenId>(order - 1));
  for (auto& c : contexts) {
    for (auto& t : c) t = r.u32();
  }
  const std::size_t n_logits = checked_count(static_cast<std::uint64_t>(n_ctx + 1) * v, 8, r);
  std::vector<double> logits(n_logits);
  for (auto& x : logits) x = r.f64();
  try {
    NGramSoftmaxModel m(std::move(vocab), order, src, std::move(contexts));
    if (m.num_buckets() != n_ctx + 1) throw FormatError("duplicate n-gram contexts in model stream");
    m.set_logits(std::move(logits));
    return m;
  } catch (const UsageError& e) {
    throw FormatError(std::string("invalid n-gram parameters: ") + e.what());
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const AnyModel& model) {
  detail::ByteWriter w;
  w.raw(kModelMagic.data(), kModelMagic.size());
  w.u32(kModelFormatVersion);
  const auto& tokens = model.vocabulary().tokens();
  w.u32(static_cast<std::uint32_t>(tokens.size()));
  for (const auto& t : tokens) w.str(t);
  w.u8(static_cast<std::uint8_t>(model.backend()));
  if (const auto* t = model.as_table()) {
    detail::write_table(w, *t);
  } else {
    detail::write_ngram(w, *model.as_ngram());
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.u64(sum);
  return w.take();
}

inline AnyModel deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  auto magic = r.need(4);
  if (std::memcmp(magic.data(), kModelMagic.data(), 4) != 0) throw FormatError("bad model magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  if (bytes.size() < 8 + 8) throw FormatError("model stream is truncated");
  const std::uint64_t expected = fnv1a(bytes.first(bytes.size() - 8));
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + i]) << (8 * i);
  if (expected != stored) throw FormatError("model checksum mismatch (corrupted or truncated stream)");

  detail::ByteReader body(bytes.first(bytes.size() - 8));
  body.need(8);
  const std::size_t n_tokens = detail::checked_count(body.u32(), 4, body);
  std::vector<std::string> tokens(n_tokens);
  for (auto& t : tokens) t = body.str();
  Vocabulary vocab = Vocabulary::from_tokens(tokens);
  const auto tag = body.u8();
  auto model = [&]() -> AnyModel {
    switch (static_cast<Backend>(tag)) {
      case Backend::kTable:
        return detail::read_table(body, std::move(vocab));
      case Backend::kNGram:
        return detail::read_ngram(body, std::move(vocab));
    }
    throw FormatError("unknown backend tag " + std::to_string(tag));
  }();
  if (body.remaining() != 0) throw FormatError("trailing bytes after model parameters");
  return model;
}

inline void save_model(const AnyModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing model file: " + path);
}

inline AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace lookahead
