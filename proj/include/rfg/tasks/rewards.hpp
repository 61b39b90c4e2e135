#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rfg/smiles.hpp"

namespace rfg::tasks {

/// Pure score in [0, 1]; invalid molecules score 0.
struct RewardFn {
  std::string name;
  std::function<double(std::string_view)> score;

  double operator()(std::string_view mol) const { return score(mol); }
};

inline double reward_aromatic_frac(std::string_view mol) {
  const auto tokens = smiles::tokenize(mol);
  if (!smiles::validate(tokens).valid) return 0.0;
  return smiles::descriptors(tokens).aromatic_fraction;
}

struct GaussianTarget {
  std::string descriptor;  // heavy_atoms, ring_closures, aromatic_fraction, hetero_fraction, length
  double center = 0.0;
  double width = 1.0;
};

inline double descriptor_value(const smiles::Descriptors& d, const std::string& name) {
  if (name == "heavy_atoms") return static_cast<double>(d.heavy_atoms);
  if (name == "ring_closures") return static_cast<double>(d.ring_closures);
  if (name == "aromatic_fraction") return d.aromatic_fraction;
  if (name == "hetero_fraction") return d.hetero_fraction;
  if (name == "length") return static_cast<double>(d.length);
  throw Error("unknown descriptor '" + name + "'");
}

inline std::vector<GaussianTarget> default_mpo_targets() {
  return {{"heavy_atoms", 20.0, 6.0}, {"hetero_fraction", 0.25, 0.1}, {"ring_closures", 2.0, 1.0}};
}

/// "name center width, name center width, ..."
inline std::vector<GaussianTarget> parse_mpo_targets(const std::string& text) {
  std::vector<GaussianTarget> out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ',')) {
    std::istringstream is(item);
    GaussianTarget t;
    std::string extra;
    if (!(is >> t.descriptor >> t.center >> t.width) || (is >> extra)) {
      throw Error("mpo target '" + item + "': expected 'descriptor center width'");
    }
    descriptor_value({}, t.descriptor);
    if (!(t.width > 0.0)) throw Error("mpo target '" + t.descriptor + "': width must be > 0");
    out.push_back(t);
  }
  if (out.empty()) throw Error("mpo targets: none given");
  return out;
}

/// Geometric mean of exp(-(d - c)^2 / 2w^2) over the targets.
inline double reward_property_mpo(std::string_view mol, const std::vector<GaussianTarget>& targets) {
  const auto tokens = smiles::tokenize(mol);
  if (!smiles::validate(tokens).valid || targets.empty()) return 0.0;
  const auto d = smiles::descriptors(tokens);
  double log_sum = 0.0;
  for (const auto& t : targets) {
    const double z = (descriptor_value(d, t.descriptor) - t.center) / t.width;
    log_sum += -0.5 * z * z;
  }
  return std::exp(log_sum / static_cast<double>(targets.size()));
}

inline double reward_similarity(std::string_view mol, const smiles::Fingerprint& target) {
  const auto tokens = smiles::tokenize(mol);
  if (!smiles::validate(tokens).valid) return 0.0;
  return smiles::tanimoto(smiles::fingerprint(tokens, target.radius(), target.width()), target);
}

struct TaskSpec {
  std::string name = "aromatic_frac";
  std::string similarity_target = "CC(=O)Nc1ccc(O)cc1";
  std::vector<GaussianTarget> mpo_targets = default_mpo_targets();
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"aromatic_frac", "property_mpo", "similarity"};
  return names;
}

inline RewardFn make_task(const TaskSpec& spec) {
  if (spec.name == "aromatic_frac") return {spec.name, reward_aromatic_frac};
  if (spec.name == "property_mpo") {
    return {spec.name, [t = spec.mpo_targets](std::string_view m) {
              return reward_property_mpo(m, t);
            }};
  }
  if (spec.name == "similarity") {
    if (!smiles::is_valid(spec.similarity_target)) {
      throw Error("similarity target '" + spec.similarity_target + "' is not a valid molecule");
    }
    auto fp = smiles::fingerprint(smiles::tokenize(spec.similarity_target));
    return {spec.name, [fp](std::string_view m) { return reward_similarity(m, fp); }};
  }
  throw Error("unknown task '" + spec.name + "'");
}

}  // namespace rfg::tasks
