#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfg/smiles/tokenizer.hpp"

namespace rfg::smiles {

struct ValidationOptions {
  // Explicit bond-order sums capped at C<=4, N<=3, O<=2 (organic-subset atoms).
  bool valence_check = false;
};

struct Validation {
  bool valid = true;
  std::vector<std::string> diagnostics;

  explicit operator bool() const { return valid; }
  void fail(std::string why) {
    valid = false;
    diagnostics.push_back(std::move(why));
  }
};

struct AtomInfo {
  std::string element;  // "C", "c", "Cl", "n", "*", ...
  bool aromatic = false;
  bool bracket = false;
};

inline bool is_element(std::string_view sym) {
  static constexpr std::string_view kElements[] = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
      "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni",
      "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo",
      "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba",
      "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
      "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
      "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf",
      "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
      "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  for (auto e : kElements) {
    if (e == sym) return true;
  }
  return false;
}

/// Element and aromaticity of an atom token; nullopt when the token is not a
/// well-formed atom. Bracket grammar: [isotope? symbol chiral? Hcount? charge? class?].
inline std::optional<AtomInfo> parse_atom(std::string_view tok) {
  if (classify(tok) != TokenKind::Atom) return std::nullopt;
  if (tok.front() != '[') {
    AtomInfo a;
    a.element = std::string(tok);
    a.aromatic = std::islower(static_cast<unsigned char>(tok.front())) != 0;
    return a;
  }
  if (tok.size() < 3 || tok.back() != ']') return std::nullopt;
  const std::string_view body = tok.substr(1, tok.size() - 2);
  std::size_t i = 0;
  auto digit = [&](std::size_t k) {
    return k < body.size() && std::isdigit(static_cast<unsigned char>(body[k]));
  };
  while (digit(i)) ++i;
  AtomInfo a;
  a.bracket = true;
  if (i >= body.size()) return std::nullopt;
  static const char* const kAromatic[] = {"se", "as", "te", "b", "c", "n", "o", "p", "s"};
  if (body[i] == '*') {
    a.element = "*";
    ++i;
  } else if (std::isupper(static_cast<unsigned char>(body[i]))) {
    std::size_t len = 1;
    if (i + 1 < body.size() && std::islower(static_cast<unsigned char>(body[i + 1])) &&
        is_element(body.substr(i, 2))) {
      len = 2;
    }
    if (!is_element(body.substr(i, len))) return std::nullopt;
    a.element = std::string(body.substr(i, len));
    i += len;
  } else {
    bool found = false;
    for (const char* sym : kAromatic) {
      const std::string_view sv(sym);
      if (body.substr(i, sv.size()) == sv) {
        a.element = std::string(sv);
        a.aromatic = true;
        i += sv.size();
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  if (i < body.size() && body[i] == '@') {
    ++i;
    if (i < body.size() && body[i] == '@') ++i;
  }
  if (i < body.size() && body[i] == 'H') {
    ++i;
    if (digit(i)) ++i;
  }
  if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
    const char sign = body[i++];
    if (i < body.size() && body[i] == sign) {
      ++i;
    } else {
      while (digit(i)) ++i;
    }
  }
  if (i < body.size() && body[i] == ':') {
    ++i;
    if (!digit(i)) return std::nullopt;
    while (digit(i)) ++i;
  }
  if (i != body.size()) return std::nullopt;
  return a;
}

inline int bond_order(std::string_view bond) {
  if (bond == "=") return 2;
  if (bond == "#") return 3;
  if (bond == "$") return 4;
  return 1;
}

/// Syntactic well-formedness of a token list. Never throws; every failure is
/// reported as a diagnostic.
inline Validation validate(const TokenList& tokens, const ValidationOptions& opts = {}) {
  Validation v;
  if (tokens.empty()) {
    v.fail("empty string");
    return v;
  }

  struct OpenRing {
    std::size_t atom;
    int order;
  };
  std::vector<AtomInfo> atoms;
  std::vector<int> valence;
  std::vector<std::size_t> branch_stack;
  std::map<std::string, OpenRing> open_rings;
  std::optional<std::size_t> current;  // atom new bonds attach to
  std::optional<std::string> pending_bond;
  TokenKind prev = TokenKind::Dot;     // start behaves like after a '.'
  bool at_start = true;

  auto connect = [&](std::size_t a, std::size_t b, int order) {
    valence[a] += order;
    valence[b] += order;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    const TokenKind kind = classify(tok);
    const std::string where = " at token " + std::to_string(i) + " '" + tok + "'";
    switch (kind) {
      case TokenKind::Unknown:
        v.fail("unknown token" + where);
        break;
      case TokenKind::Atom: {
        auto info = parse_atom(tok);
        if (!info) {
          v.fail("malformed bracket atom" + where);
          info = AtomInfo{"*", false, true};
        }
        atoms.push_back(*info);
        valence.push_back(0);
        const std::size_t idx = atoms.size() - 1;
        if (current && prev != TokenKind::Dot) {
          connect(*current, idx, pending_bond ? bond_order(*pending_bond) : 1);
        }
        current = idx;
        pending_bond.reset();
        break;
      }
      case TokenKind::Bond:
        if (at_start) {
          v.fail("bond symbol at start of string");
        } else if (prev == TokenKind::Bond) {
          v.fail("consecutive bond symbols" + where);
        } else if (prev == TokenKind::Dot) {
          v.fail("bond after '.'" + where);
        }
        pending_bond = tok;
        break;
      case TokenKind::BranchOpen:
        if (!current || prev == TokenKind::Bond || prev == TokenKind::BranchOpen ||
            prev == TokenKind::Dot) {
          v.fail("branch without a preceding atom" + where);
        }
        branch_stack.push_back(current.value_or(0));
        break;
      case TokenKind::BranchClose:
        if (branch_stack.empty()) {
          v.fail("unbalanced parenthesis: ')' without '('" + where);
        } else {
          if (prev == TokenKind::BranchOpen) v.fail("empty branch" + where);
          if (prev == TokenKind::Bond) v.fail("bond symbol before ')'" + where);
          current = branch_stack.back();
          branch_stack.pop_back();
        }
        pending_bond.reset();
        break;
      case TokenKind::Ring: {
        if (!current || prev == TokenKind::BranchOpen || prev == TokenKind::Dot ||
            prev == TokenKind::BranchClose) {
          v.fail("ring closure without a preceding atom" + where);
          break;
        }
        const std::string label = tok.front() == '%' ? tok.substr(1) : tok;
        const int order = pending_bond ? bond_order(*pending_bond) : 1;
        auto it = open_rings.find(label);
        if (it == open_rings.end()) {
          open_rings.emplace(label, OpenRing{*current, order});
        } else {
          if (it->second.atom == *current) {
            v.fail("ring index " + label + " closes on the atom that opened it");
          } else {
            connect(it->second.atom, *current, std::max(order, it->second.order));
          }
          open_rings.erase(it);
        }
        pending_bond.reset();
        break;
      }
      case TokenKind::Dot:
        if (at_start || prev == TokenKind::Bond || prev == TokenKind::BranchOpen ||
            prev == TokenKind::Dot) {
          v.fail("misplaced '.'" + where);
        }
        if (!branch_stack.empty()) v.fail("'.' inside a branch" + where);
        pending_bond.reset();
        break;
    }
    prev = kind;
    at_start = false;
  }

  if (prev == TokenKind::Bond) v.fail("bond symbol at end of string");
  if (prev == TokenKind::BranchOpen || prev == TokenKind::Dot) {
    v.fail("string ends with '" + tokens.back() + "'");
  }
  if (!branch_stack.empty()) {
    v.fail("unbalanced parenthesis: " + std::to_string(branch_stack.size()) +
           " unclosed '('");
  }
  for (const auto& [label, ring] : open_rings) {
    v.fail("unclosed ring index " + label);
  }
  if (atoms.empty()) v.fail("no atoms");

  if (opts.valence_check) {
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (atoms[a].bracket) continue;
      const auto& el = atoms[a].element;
      int cap = 0;
      if (el == "C" || el == "c") cap = 4;
      else if (el == "N" || el == "n") cap = 3;
      else if (el == "O" || el == "o") cap = 2;
      if (cap && valence[a] > cap) {
        v.fail("valence " + std::to_string(valence[a]) + " exceeds " +
               std::to_string(cap) + " on atom " + std::to_string(a) + " (" + el + ")");
      }
    }
  }
  return v;
}

inline Validation validate(std::string_view s, const ValidationOptions& opts = {}) {
  return validate(tokenize(s), opts);
}

inline bool is_valid(std::string_view s, const ValidationOptions& opts = {}) {
  return validate(tokenize(s), opts).valid;
}

}  // namespace rfg::smiles
