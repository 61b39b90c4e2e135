#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "rfg/smiles/fingerprint.hpp"

namespace rfg::explore {

enum class DfMode { none, unique, similar };

inline const char* to_string(DfMode m) {
  switch (m) {
    case DfMode::unique: return "unique";
    case DfMode::similar: return "similar";
    default: return "none";
  }
}

struct Bin {
  smiles::Fingerprint centroid;
  std::size_t count = 0;
};

/// Memory of generated molecules that zeroes the reward of repeats.
class DiversityMemory {
 public:
  explicit DiversityMemory(DfMode mode = DfMode::none, double threshold = 0.65,
                           std::size_t bin_capacity = 25)
      : mode_(mode), threshold_(threshold), bin_capacity_(bin_capacity) {}

  DfMode mode() const { return mode_; }
  const std::vector<Bin>& bins() const { return bins_; }
  std::size_t seen() const { return seen_.size(); }

  /// Reward multiplier in {0, 1}; records the molecule.
  double penalty(const std::string& key, const smiles::Fingerprint& fp) {
    switch (mode_) {
      case DfMode::unique:
        return seen_.insert(key).second ? 1.0 : 0.0;
      case DfMode::similar: {
        for (auto& b : bins_) {
          if (smiles::tanimoto(fp, b.centroid) >= threshold_) {
            return ++b.count > bin_capacity_ ? 0.0 : 1.0;
          }
        }
        bins_.push_back({fp, 1});
        return 1.0;
      }
      default:
        return 1.0;
    }
  }

 private:
  DfMode mode_;
  double threshold_;
  std::size_t bin_capacity_;
  std::unordered_set<std::string> seen_;
  std::vector<Bin> bins_;
};

}  // namespace rfg::explore
