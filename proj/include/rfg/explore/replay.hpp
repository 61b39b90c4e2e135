#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rfg/numcore/random.hpp"
#include "rfg/smiles/vocabulary.hpp"

namespace rfg::explore {

enum class Sampler { uniform, prioritized };

inline const char* to_string(Sampler s) {
  return s == Sampler::prioritized ? "prioritized" : "uniform";
}

struct ReplayEntry {
  std::string key;
  std::vector<smiles::TokenId> tokens;
  double reward = 0.0;
  std::uint64_t seq = 0;  // insertion order, breaks eviction ties
};

/// The `capacity` best molecules seen so far, one entry per key.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100, Sampler sampler = Sampler::prioritized)
      : capacity_(capacity), sampler_(sampler) {
    if (capacity == 0) throw Error("replay buffer capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  Sampler sampler() const { return sampler_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ReplayEntry>& entries() const { return entries_; }

  bool contains(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const ReplayEntry& e) { return e.key == key; });
  }

  /// Returns false when the key is already stored. On overflow the lowest
  /// reward is evicted; among equal rewards the newest goes first.
  bool insert(std::string key, std::vector<smiles::TokenId> tokens, double reward) {
    if (contains(key)) return false;
    entries_.push_back({std::move(key), std::move(tokens), reward, next_seq_++});
    if (entries_.size() > capacity_) {
      auto worst = std::min_element(entries_.begin(), entries_.end(),
                                    [](const ReplayEntry& a, const ReplayEntry& b) {
                                      if (a.reward != b.reward) return a.reward < b.reward;
                                      return a.seq > b.seq;
                                    });
      entries_.erase(worst);
    }
    return true;
  }

  /// Per-entry draw probabilities in entries() order.
  std::vector<double> probabilities() const {
    const std::size_t n = entries_.size();
    std::vector<double> p(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    if (sampler_ == Sampler::uniform || n == 0) return p;
    double total = 0.0;
    for (const auto& e : entries_) total += std::max(0.0, e.reward);
    if (total <= 0.0) return p;
    for (std::size_t i = 0; i < n; ++i) p[i] = std::max(0.0, entries_[i].reward) / total;
    return p;
  }

  /// n draws with replacement; returns indices into entries().
  std::vector<std::size_t> sample_indices(long long n, Rng& rng) const {
    if (n < 0) throw Error("replay sample size must be >= 0");
    if (entries_.empty()) throw Error("cannot sample from an empty replay buffer");
    const auto p = probabilities();
    std::vector<double> cdf(p.size());
    double c = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = c += p[i];
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) {
      const double u = rng.uniform() * c;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t i = static_cast<std::size_t>(it - cdf.begin());
      if (i >= cdf.size()) i = cdf.size() - 1;
      while (p[i] == 0.0 && i > 0) --i;
      out.push_back(i);
    }
    return out;
  }

  std::vector<ReplayEntry> sample(long long n, Rng& rng) const {
    std::vector<ReplayEntry> out;
    for (auto i : sample_indices(n, rng)) out.push_back(entries_[i]);
    return out;
  }

  /// One line per entry: key <TAB> reward <TAB> space-separated token ids.
  void dump(std::ostream& os) const {
    for (const auto& e : entries_) {
      os << e.key << '\t' << std::setprecision(17) << e.reward << '\t';
      for (std::size_t i = 0; i < e.tokens.size(); ++i) os << (i ? " " : "") << e.tokens[i];
      os << '\n';
    }
  }

  static ReplayBuffer restore(std::istream& is, std::size_t capacity, Sampler sampler) {
    ReplayBuffer buf(capacity, sampler);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) {
        throw Error("replay restore: line " + std::to_string(lineno) + ": expected 3 fields");
      }
      double reward = 0.0;
      std::vector<smiles::TokenId> ids;
      try {
        std::size_t used = 0;
        const std::string r = line.substr(t1 + 1, t2 - t1 - 1);
        reward = std::stod(r, &used);
        if (used != r.size()) throw std::invalid_argument(r);
        std::istringstream ts(line.substr(t2 + 1));
        std::string tok;
        while (ts >> tok) ids.push_back(static_cast<smiles::TokenId>(std::stoi(tok)));
      } catch (const std::exception&) {
        throw Error("replay restore: line " + std::to_string(lineno) + ": malformed number");
      }
      buf.insert(line.substr(0, t1), std::move(ids), reward);
    }
    return buf;
  }

 private:
  std::size_t capacity_;
  Sampler sampler_;
  std::vector<ReplayEntry> entries_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace rfg::explore
