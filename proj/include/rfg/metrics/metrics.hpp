#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rfg/metrics/runlog.hpp"
#include "rfg/numcore/random.hpp"
#include "rfg/smiles.hpp"

namespace rfg::metrics {

inline void require_records(const RunLog& log, const char* what) {
  if (log.empty()) throw Error(std::string(what) + ": empty run log");
}

inline std::vector<bool> validity_mask(const RunLog& log) {
  std::vector<bool> v;
  v.reserve(log.size());
  for (const auto& r : log.records) v.push_back(smiles::is_valid(r.smiles));
  return v;
}

inline double validity_frac(const RunLog& log) {
  require_records(log, "validity_frac");
  const auto v = validity_mask(log);
  return static_cast<double>(std::count(v.begin(), v.end(), true)) /
         static_cast<double>(log.size());
}

/// Distinct normal-form keys over all records, invalid ones included.
inline double uniqueness_frac(const RunLog& log) {
  require_records(log, "uniqueness_frac");
  std::unordered_set<std::string> keys;
  for (const auto& r : log.records) keys.insert(smiles::normal_form(r.smiles));
  return static_cast<double>(keys.size()) / static_cast<double>(log.size());
}

/// Running best-10 over distinct valid molecules (best reward per key).
class TopK {
 public:
  explicit TopK(std::size_t k = 10) : k_(k) {}

  void add(const std::string& key, double reward) {
    auto [it, inserted] = best_.try_emplace(key, reward);
    if (!inserted) {
      if (reward <= it->second) return;
      ranked_.erase({it->second, key});
      it->second = reward;
    }
    ranked_.insert({reward, key});
  }

  double average() const {
    if (ranked_.empty()) return 0.0;
    double s = 0.0;
    std::size_t n = 0;
    for (auto it = ranked_.rbegin(); it != ranked_.rend() && n < k_; ++it, ++n) s += it->first;
    return s / static_cast<double>(n);
  }

 private:
  std::size_t k_;
  std::unordered_map<std::string, double> best_;
  std::set<std::pair<double, std::string>> ranked_;
};

inline double top10_avg(const RunLog& log) {
  require_records(log, "top10_avg");
  TopK top;
  const auto valid = validity_mask(log);
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (valid[i]) top.add(smiles::normal_form(log.records[i].smiles), log.records[i].reward);
  }
  return top.average();
}

/// Running Top-10 average every `interval` molecules over ceil(budget/interval)
/// checkpoints; short runs are padded with their final value. Records past
/// the budget are ignored.
inline std::vector<double> top10_curve(const RunLog& log, std::size_t interval = 100) {
  require_records(log, "top10_auc");
  if (interval == 0) throw Error("top10_auc: interval must be >= 1");
  if (log.budget == 0) throw Error("top10_auc: budget must be >= 1");
  const std::size_t checkpoints = (log.budget + interval - 1) / interval;
  const std::size_t n = std::min(log.size(), log.budget);
  TopK top;
  std::vector<double> curve;
  std::size_t i = 0;
  for (std::size_t c = 1; c <= checkpoints; ++c) {
    const std::size_t upto = std::min(n, c * interval);
    for (; i < upto; ++i) {
      const auto& r = log.records[i];
      if (smiles::is_valid(r.smiles)) top.add(smiles::normal_form(r.smiles), r.reward);
    }
    curve.push_back(top.average());
  }
  return curve;
}

inline double top10_auc(const RunLog& log, std::size_t interval = 100) {
  const auto curve = top10_curve(log, interval);
  double s = 0.0;
  for (double v : curve) s += v;
  return s / static_cast<double>(curve.size());
}

/// Sphere-exclusion diversity over min(k, n) valid molecules drawn without
/// replacement: share of molecules that become centers in a greedy pass.
inline double sediv(const std::vector<std::string>& molecules, std::size_t sample_k = 1000,
                    double threshold = 0.65, std::uint64_t seed = 0) {
  std::vector<std::string> valid;
  for (const auto& m : molecules) {
    if (smiles::is_valid(m)) valid.push_back(m);
  }
  if (valid.empty()) throw Error("sediv: no valid molecules");
  if (sample_k == 0) throw Error("sediv: sample size must be >= 1");
  const std::size_t k = std::min(sample_k, valid.size());
  Rng rng(seed, 0x5ed1);
  for (std::size_t i = 0; i < k; ++i) {  // partial Fisher-Yates
    const auto j = i + static_cast<std::size_t>(rng.below(valid.size() - i));
    std::swap(valid[i], valid[j]);
  }
  std::vector<smiles::Fingerprint> centers;
  for (std::size_t i = 0; i < k; ++i) {
    const auto fp = smiles::fingerprint(smiles::tokenize(valid[i]));
    const bool covered = std::any_of(centers.begin(), centers.end(), [&](const auto& c) {
      return smiles::tanimoto(fp, c) >= threshold;
    });
    if (!covered) centers.push_back(fp);
  }
  return static_cast<double>(centers.size()) / static_cast<double>(k);
}

struct Range {
  double lo = -INFINITY;
  double hi = INFINITY;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Descriptor windows standing in for property filters.
struct FilterRanges {
  Range length{5, 40};
  Range heavy_atoms{5, 30};
  Range ring_closures{0, 4};
  Range hetero_fraction{0.05, 0.5};

  static FilterRanges everything() { return {{}, {}, {}, {}}; }

  bool accepts(const smiles::Descriptors& d) const {
    return length.contains(d.length) && heavy_atoms.contains(d.heavy_atoms) &&
           ring_closures.contains(d.ring_closures) && hetero_fraction.contains(d.hetero_fraction);
  }
};

/// Valid molecules inside every range, over all records.
inline double filter_pass_frac(const RunLog& log, const FilterRanges& ranges = {}) {
  require_records(log, "filter_pass_frac");
  std::size_t pass = 0;
  for (const auto& r : log.records) {
    const auto tokens = smiles::tokenize(r.smiles);
    if (!smiles::validate(tokens).valid) continue;
    if (ranges.accepts(smiles::descriptors(tokens))) ++pass;
  }
  return static_cast<double>(pass) / static_cast<double>(log.size());
}

struct MetricOptions {
  std::size_t auc_interval = 100;
  std::size_t sediv_k = 1000;
  double sediv_threshold = 0.65;
  std::uint64_t sediv_seed = 0;
  FilterRanges ranges;
};

struct MetricReport {
  double valid_frac = 0.0;
  double unique_frac = 0.0;
  double top10_avg = 0.0;
  double top10_auc = 0.0;
  double sediv = 0.0;
  double filter_pass_frac = 0.0;

  static constexpr const char* kCsvHeader =
      "valid_frac,unique_frac,top10_avg,top10_auc,sediv,filter_pass_frac";

  std::vector<std::pair<std::string, double>> fields() const {
    return {{"valid_frac", valid_frac}, {"unique_frac", unique_frac},
            {"top10_avg", top10_avg},   {"top10_auc", top10_auc},
            {"sediv", sediv},           {"filter_pass_frac", filter_pass_frac}};
  }

  std::string to_kv() const {
    std::string s;
    for (const auto& [k, v] : fields()) s += k + "=" + format_double(v) + "\n";
    return s;
  }

  std::string csv_row() const {
    std::string s;
    for (const auto& [k, v] : fields()) s += (s.empty() ? "" : ",") + format_double(v);
    return s;
  }
};

/// All metrics over the first `budget` records.
inline MetricReport compute_report(const RunLog& full, const MetricOptions& o = {}) {
  require_records(full, "metrics");
  RunLog log = full;
  if (log.records.size() > log.budget) log.records.resize(log.budget);
  MetricReport m;
  m.valid_frac = validity_frac(log);
  m.unique_frac = uniqueness_frac(log);
  m.top10_avg = top10_avg(log);
  m.top10_auc = top10_auc(log, o.auc_interval);
  std::vector<std::string> mols;
  for (const auto& r : log.records) mols.push_back(r.smiles);
  m.sediv = m.valid_frac > 0 ? sediv(mols, o.sediv_k, o.sediv_threshold, o.sediv_seed) : 0.0;
  m.filter_pass_frac = filter_pass_frac(log, o.ranges);
  return m;
}

}  // namespace rfg::metrics
