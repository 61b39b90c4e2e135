#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace rfg::smiles {

using TokenList = std::vector<std::string>;

enum class TokenKind { Atom, Bond, BranchOpen, BranchClose, Ring, Dot, Unknown };

namespace detail {

inline bool is_organic_aliphatic(char c) {
  switch (c) {
    case 'B': case 'C': case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
      return true;
    default:
      return false;
  }
}

inline bool is_organic_aromatic(char c) {
  switch (c) {
    case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
      return true;
    default:
      return false;
  }
}

}  // namespace detail

/// Splits a SMILES string into tokens. Bracket atoms, Cl/Br and %nn ring
/// labels are single tokens; an unterminated bracket becomes one token running
/// to the end of the string (rejected later by the validator).
inline TokenList tokenize(std::string_view s) {
  TokenList out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '[') {
      const auto close = s.find(']', i + 1);
      const auto end = close == std::string_view::npos ? s.size() : close + 1;
      out.emplace_back(s.substr(i, end - i));
      i = end;
    } else if ((c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') ||
               (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r')) {
      out.emplace_back(s.substr(i, 2));
      i += 2;
    } else if (c == '%' && i + 2 < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[i + 1])) &&
               std::isdigit(static_cast<unsigned char>(s[i + 2]))) {
      out.emplace_back(s.substr(i, 3));
      i += 3;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

inline std::string detokenize(const TokenList& tokens) {
  std::string s;
  for (const auto& t : tokens) s += t;
  return s;
}

inline TokenKind classify(std::string_view tok) {
  if (tok.empty()) return TokenKind::Unknown;
  if (tok.front() == '[') return TokenKind::Atom;
  if (tok == "Cl" || tok == "Br") return TokenKind::Atom;
  if (tok.size() == 3 && tok.front() == '%') return TokenKind::Ring;
  if (tok.size() != 1) return TokenKind::Unknown;
  const char c = tok.front();
  if (detail::is_organic_aliphatic(c) || detail::is_organic_aromatic(c) || c == '*') {
    return TokenKind::Atom;
  }
  if (std::isdigit(static_cast<unsigned char>(c))) return TokenKind::Ring;
  switch (c) {
    case '-': case '=': case '#': case '$': case ':': case '/': case '\\':
      return TokenKind::Bond;
    case '(':
      return TokenKind::BranchOpen;
    case ')':
      return TokenKind::BranchClose;
    case '.':
      return TokenKind::Dot;
    default:
      return TokenKind::Unknown;
  }
}

/// Syntactic identity key: surrounding whitespace removed, otherwise the
/// string unchanged. Different spellings of one molecule get different keys.
inline std::string normal_form(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace rfg::smiles
