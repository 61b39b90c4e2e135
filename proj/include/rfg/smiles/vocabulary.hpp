#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rfg/numcore/tensor.hpp"
#include "rfg/smiles/tokenizer.hpp"

namespace rfg::smiles {

using TokenId = std::int32_t;

/// Bidirectional token <-> id map. Id 0 is GO ("^"), id 1 is EOS ("$"); the
/// molecule tokens follow in lexicographic order.
class Vocabulary {
 public:
  static constexpr TokenId kGo = 0;
  static constexpr TokenId kEos = 1;
  static constexpr std::string_view kGoToken = "^";
  static constexpr std::string_view kEosToken = "$";

  Vocabulary() : tokens_{std::string(kGoToken), std::string(kEosToken)} { reindex(); }

  /// Vocabulary covering every token of `molecules`.
  static Vocabulary from_molecules(const std::vector<std::string>& molecules) {
    std::set<std::string> seen;
    for (const auto& m : molecules) {
      for (auto& t : tokenize(m)) seen.insert(std::move(t));
    }
    return from_tokens({seen.begin(), seen.end()});
  }

  /// Molecule tokens in the given order (GO/EOS are prepended).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (const auto& t : tokens) {
      if (t == kGoToken || t == kEosToken) {
        throw Error("vocabulary: token '" + t + "' is reserved");
      }
      if (v.index_.count(t)) throw Error("vocabulary: duplicate token '" + t + "'");
      v.tokens_.push_back(t);
      v.index_[t] = static_cast<TokenId>(v.tokens_.size() - 1);
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool contains(std::string_view tok) const { return index_.count(std::string(tok)) != 0; }

  TokenId id(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    if (it == index_.end()) throw Error("vocabulary: unknown token '" + std::string(tok) + "'");
    return it->second;
  }

  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw Error("vocabulary: unknown token id " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  /// GO, molecule tokens..., EOS.
  std::vector<TokenId> encode(std::string_view smiles) const {
    std::vector<TokenId> ids{kGo};
    for (const auto& t : tokenize(smiles)) ids.push_back(id(t));
    ids.push_back(kEos);
    return ids;
  }

  /// Inverse of encode; GO is skipped and decoding stops at EOS.
  std::string decode(const std::vector<TokenId>& ids) const {
    std::string s;
    for (TokenId i : ids) {
      if (i == kGo) continue;
      if (i == kEos) break;
      s += token(i);
    }
    return s;
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      index_[tokens_[i]] = static_cast<TokenId>(i);
    }
  }

  std::vector<std::string> tokens_;
  std::map<std::string, TokenId> index_;
};

/// One SMILES per line; blank lines and lines starting with '#' are skipped.
/// ('#' inside a line is the triple bond, so trailing comments are not supported.)
inline std::vector<std::string> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto s = normal_form(line);
    if (s.empty() || s.front() == '#') continue;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rfg::smiles
