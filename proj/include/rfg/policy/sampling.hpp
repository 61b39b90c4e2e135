#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "rfg/policy/model.hpp"

namespace rfg::policy {

/// One generated molecule: GO, actions..., (EOS). Rewards and likelihoods
/// are filled in by the scoring stage.
struct Episode {
  std::vector<TokenId> tokens;
  std::vector<double> log_probs;  // log pi(a_t|s_t) per action, size tokens-1
  std::string smiles;
  double reward = 0.0;             // raw task score
  double prior_ll = 0.0;
  double agent_ll = 0.0;
  std::uint64_t index = 0;         // global sample index within the run

  bool terminated() const { return !tokens.empty() && tokens.back() == Vocabulary::kEos; }
  double sum_log_probs() const {
    double s = 0.0;
    for (double v : log_probs) s += v;
    return s;
  }
};

struct SamplingOptions {
  bool greedy = false;  // argmax instead of sampling
  int threads = 1;
};

namespace detail {

inline TokenId draw(std::span<const double> log_probs, Rng& rng, bool greedy) {
  if (greedy) {
    return static_cast<TokenId>(std::max_element(log_probs.begin(), log_probs.end()) -
                                log_probs.begin());
  }
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t j = 0; j < log_probs.size(); ++j) {
    c += std::exp(log_probs[j]);
    if (u < c) return static_cast<TokenId>(j);
  }
  // u landed in the rounding gap above the cumulative sum: last non-zero entry
  for (std::size_t j = log_probs.size(); j-- > 0;) {
    if (std::exp(log_probs[j]) > 0) return static_cast<TokenId>(j);
  }
  return Vocabulary::kEos;
}

// Samples episodes [first, first+count) of the stream into out[0..count).
inline void sample_range(const PolicyParams& p, std::uint64_t seed, std::uint64_t first,
                         std::size_t count, bool greedy, Episode* out) {
  std::vector<Rng> rngs;
  std::vector<std::int32_t> active(count);
  for (std::size_t i = 0; i < count; ++i) {
    rngs.emplace_back(seed, first + i);
    out[i].tokens = {Vocabulary::kGo};
    out[i].log_probs.clear();
    out[i].index = first + i;
    active[i] = static_cast<std::int32_t>(i);
  }
  Hidden hidden = zero_hidden(p, count);
  const auto max_len = static_cast<std::size_t>(p.config.max_len);
  while (!active.empty()) {
    std::vector<TokenId> inputs(active.size());
    for (std::size_t r = 0; r < active.size(); ++r) inputs[r] = out[active[r]].tokens.back();
    StepOutput s = step(p, inputs, hidden);
    const std::size_t V = s.log_probs.cols();
    std::vector<std::int32_t> keep_rows, still;
    for (std::size_t r = 0; r < active.size(); ++r) {
      Episode& e = out[active[r]];
      const auto row = s.log_probs.data().subspan(r * V, V);
      const TokenId a = draw(row, rngs[active[r]], greedy);
      e.tokens.push_back(a);
      e.log_probs.push_back(row[a]);
      if (a != Vocabulary::kEos && e.log_probs.size() < max_len) {
        keep_rows.push_back(static_cast<std::int32_t>(r));
        still.push_back(active[r]);
      }
    }
    if (still.size() != active.size() && !still.empty()) {
      hidden = select_rows(s.hidden, keep_rows);
    } else {
      hidden = std::move(s.hidden);
    }
    active = std::move(still);
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i].smiles = p.vocab.decode(out[i].tokens);
    out[i].agent_ll = out[i].sum_log_probs();
  }
}

}  // namespace detail

/// Samples n episodes with indices [first_index, first_index+n). Episode i
/// draws only from the stream (seed, i), so the result does not depend on
/// batch size or thread count.
inline std::vector<Episode> sample_batch(const PolicyParams& params, std::size_t n,
                                         std::uint64_t seed, std::uint64_t first_index = 0,
                                         const SamplingOptions& opts = {}) {
  std::vector<Episode> out(n);
  if (n == 0) return out;
  const PolicyParams frozen = params.clone(false);
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, opts.threads)), 1, n);
  if (workers == 1) {
    detail::sample_range(frozen, seed, first_index, n, opts.greedy, out.data());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    if (begin >= n) break;
    const std::size_t count = std::min(chunk, n - begin);
    pool.emplace_back([&, begin, count] {
      detail::sample_range(frozen, seed, first_index + begin, count, opts.greedy,
                           out.data() + begin);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rfg::policy
