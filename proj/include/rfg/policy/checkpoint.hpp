#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rfg/policy/model.hpp"

// Checkpoint layout, all integers little-endian:
//   "RFG1"                      magic
//   u32 version (=1)
//   i32 vocab_size, embedding_dim, hidden_dim, num_layers, max_len, output_hidden
//   vocab_size x { u32 byte length, token bytes }   (ids 0..V-1)
//   f64 parameters, tensors in PolicyParams order, each row-major

namespace rfg::policy {

inline constexpr std::array<char, 4> kCheckpointMagic = {'R', 'F', 'G', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    }
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    }
    return std::bit_cast<double>(v);
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error("checkpoint: truncated file");
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_checkpoint(const PolicyParams& params, const std::string& path) {
  detail::ByteWriter w;
  w.raw(std::string(kCheckpointMagic.begin(), kCheckpointMagic.end()));
  w.u32(kCheckpointVersion);
  const auto& c = params.config;
  w.i32(static_cast<std::int32_t>(params.vocab_size()));
  for (int v : {c.embedding_dim, c.hidden_dim, c.num_layers, c.max_len, c.output_hidden}) {
    w.i32(v);
  }
  for (const auto& tok : params.vocab.tokens()) {
    w.u32(static_cast<std::uint32_t>(tok.size()));
    w.raw(tok);
  }
  for (const auto& t : params.tensors) {
    for (double v : t.data()) w.f64(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot write '" + path + "'");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("checkpoint: write failed for '" + path + "'");
}

/// Loads a checkpoint; parameters come back trainable.
inline PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open '" + path + "'");
  std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  detail::ByteReader r(std::move(bytes));
  const std::string magic = r.raw(4);
  if (magic != std::string(kCheckpointMagic.begin(), kCheckpointMagic.end())) {
    throw Error("checkpoint: bad magic bytes in '" + path + "'");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto vocab_size = r.i32();
  PolicyConfig c;
  c.embedding_dim = r.i32();
  c.hidden_dim = r.i32();
  c.num_layers = r.i32();
  c.max_len = r.i32();
  c.output_hidden = r.i32();
  if (vocab_size < 2 || vocab_size > 1 << 20) throw Error("checkpoint: bad vocabulary size");
  c.validate();
  std::vector<std::string> tokens;
  for (std::int32_t i = 0; i < vocab_size; ++i) {
    const auto len = r.u32();
    if (len > 4096) throw Error("checkpoint: bad token length");
    tokens.push_back(r.raw(len));
  }
  if (tokens[0] != Vocabulary::kGoToken || tokens[1] != Vocabulary::kEosToken) {
    throw Error("checkpoint: vocabulary does not start with GO/EOS");
  }
  PolicyParams p{c, Vocabulary::from_tokens({tokens.begin() + 2, tokens.end()}), {}};
  for (const auto& shape : parameter_shapes(c, tokens.size())) {
    std::vector<double> values(num::numel(shape));
    for (auto& v : values) v = r.f64();
    p.tensors.emplace_back(shape, std::move(values), true);
  }
  if (!r.at_end()) throw Error("checkpoint: trailing bytes in '" + path + "'");
  return p;
}

/// Loads and checks that the stored architecture matches `expected`.
inline PolicyParams load_checkpoint(const std::string& path, const PolicyConfig& expected) {
  PolicyParams p = load_checkpoint(path);
  auto check = [&](const char* field, int got, int want) {
    if (got != want) {
      throw ShapeError("checkpoint: " + std::string(field) + " is " + std::to_string(got) +
                       ", expected " + std::to_string(want));
    }
  };
  check("embedding_dim", p.config.embedding_dim, expected.embedding_dim);
  check("hidden_dim", p.config.hidden_dim, expected.hidden_dim);
  check("num_layers", p.config.num_layers, expected.num_layers);
  check("max_len", p.config.max_len, expected.max_len);
  check("output_hidden", p.config.output_hidden, expected.output_hidden);
  return p;
}

}  // namespace rfg::policy
