#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rfg/numcore.hpp"

namespace rfg::rl {

using num::Tensor;

/// loss = -mean_i[ sum_t log pi(a_t|s_t) * (R_i - b_i) ].
/// `seq_log_likelihood` is the tape-connected [B] vector of per-episode sums.
inline Tensor reinforce_loss(const Tensor& seq_log_likelihood, std::span<const double> rewards,
                             std::span<const double> baselines) {
  const std::size_t n = seq_log_likelihood.size();
  if (n == 0) throw Error("reinforce_loss: empty batch");
  if (seq_log_likelihood.rank() != 1 || rewards.size() != n || baselines.size() != n) {
    throw ShapeError("reinforce_loss: batch sizes differ (" + std::to_string(n) + ", " +
                     std::to_string(rewards.size()) + ", " + std::to_string(baselines.size()) +
                     ")");
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(rewards[i]) || !std::isfinite(baselines[i])) {
      throw Error("reinforce_loss: non-finite reward or baseline at " + std::to_string(i));
    }
    w[i] = -(rewards[i] - baselines[i]) / static_cast<double>(n);
  }
  return num::sum(num::mul(seq_log_likelihood, Tensor::vector(std::move(w))));
}

/// b_i = mean of every reward except R_i.
inline std::vector<double> loo_baselines(std::span<const double> rewards) {
  const std::size_t n = rewards.size();
  if (n < 2) throw Error("loo_baselines: leave-one-out needs a batch of at least 2");
  const double total = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = (total - rewards[i]) / static_cast<double>(n - 1);
  }
  return b;
}

enum class BaselineKind { none, mab, loo };

inline const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::mab: return "mab";
    case BaselineKind::loo: return "loo";
    default: return "none";
  }
}

struct BaselineState {
  BaselineKind kind = BaselineKind::none;
  double mab_value = 0.0;
  double mab_decay = 0.1;
  bool initialized = false;
};

/// mab <- (1 - beta) * mab + beta * batch_mean; the first call sets mab to batch_mean.
inline double mab_update(BaselineState& s, double batch_mean) {
  if (!std::isfinite(batch_mean)) throw Error("mab_update: non-finite batch mean");
  if (!s.initialized) {
    s.mab_value = batch_mean;
    s.initialized = true;
  } else {
    s.mab_value = (1.0 - s.mab_decay) * s.mab_value + s.mab_decay * batch_mean;
  }
  return s.mab_value;
}

/// Indices (ascending) of the ceil(topk * n) highest rewards; ties keep the lower index.
inline std::vector<std::size_t> hill_climb_filter(std::span<const double> rewards,
                                                  double topk_frac) {
  if (!(topk_frac > 0.0 && topk_frac <= 1.0)) {
    throw Error("hill_climb_filter: topk must lie in (0, 1]");
  }
  const std::size_t n = rewards.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (topk_frac == 1.0) return idx;
  const auto keep = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(topk_frac * static_cast<double>(n) - 1e-12)));
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rewards[a] > rewards[b]; });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace rfg::rl
