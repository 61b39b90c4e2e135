#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "rfg/numcore/tensor.hpp"
#include "rfg/smiles/tokenizer.hpp"

namespace rfg::smiles {

/// Fixed-width bitset of hashed token n-grams (a stand-in for circular
/// fingerprints; only the Tanimoto geometry is used downstream).
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(std::size_t bits, int radius)
      : bits_(bits), radius_(radius), words_((bits + 63) / 64, 0) {}

  std::size_t width() const { return bits_; }
  int radius() const { return radius_; }

  void set(std::size_t bit) { words_[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  bool test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Fingerprint&) const = default;

 private:
  std::size_t bits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

namespace detail {

// FNV-1a over the n-gram's tokens, each followed by a unit separator.
inline std::uint64_t hash_ngram(const TokenList& tokens, std::size_t begin, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  mix(static_cast<unsigned char>(n));
  for (std::size_t k = begin; k < begin + n; ++k) {
    for (char c : tokens[k]) mix(static_cast<unsigned char>(c));
    mix(0x1f);
  }
  return h;
}

}  // namespace detail

/// Hashes every token n-gram of length 1..radius into a `bits`-wide set.
inline Fingerprint fingerprint(const TokenList& tokens, int radius = 3,
                               std::size_t bits = 1024) {
  if (bits == 0 || radius < 1) throw Error("fingerprint: bits and radius must be positive");
  Fingerprint fp(bits, radius);
  for (std::size_t n = 1; n <= static_cast<std::size_t>(radius); ++n) {
    if (n > tokens.size()) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      fp.set(detail::hash_ngram(tokens, i, n) % bits);
    }
  }
  return fp;
}

/// |a AND b| / |a OR b|, defined as 1.0 when both sets are empty.
inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width()) {
    throw ShapeError("tanimoto: fingerprint widths differ (" + std::to_string(a.width()) +
                     " vs " + std::to_string(b.width()) + ")");
  }
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    either += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace rfg::smiles
