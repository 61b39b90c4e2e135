#pragma once

#include <cstddef>
#include <string>

#include "rfg/numcore/tensor.hpp"
#include "rfg/smiles/tokenizer.hpp"
#include "rfg/smiles/validator.hpp"

namespace rfg::smiles {

struct Descriptors {
  std::size_t heavy_atoms = 0;
  std::size_t ring_closures = 0;    // closed ring bonds
  double aromatic_fraction = 0.0;   // aromatic atoms / atoms
  double hetero_fraction = 0.0;     // non-carbon atoms / atoms
  std::size_t length = 0;           // token count
};

/// Pure token counts over a valid token list; throws on invalid input.
inline Descriptors descriptors(const TokenList& tokens) {
  const auto check = validate(tokens);
  if (!check.valid) {
    throw Error("descriptors: invalid SMILES '" + detokenize(tokens) +
                "': " + check.diagnostics.front());
  }
  Descriptors d;
  d.length = tokens.size();
  std::size_t aromatic = 0, hetero = 0, ring_tokens = 0;
  for (const auto& tok : tokens) {
    const auto kind = classify(tok);
    if (kind == TokenKind::Ring) {
      ++ring_tokens;
    } else if (kind == TokenKind::Atom) {
      const auto info = parse_atom(tok);
      if (info->element == "H") continue;
      ++d.heavy_atoms;
      if (info->aromatic) ++aromatic;
      if (info->element != "C" && info->element != "c") ++hetero;
    }
  }
  d.ring_closures = ring_tokens / 2;
  if (d.heavy_atoms > 0) {
    d.aromatic_fraction = static_cast<double>(aromatic) / static_cast<double>(d.heavy_atoms);
    d.hetero_fraction = static_cast<double>(hetero) / static_cast<double>(d.heavy_atoms);
  }
  return d;
}

}  // namespace rfg::smiles
