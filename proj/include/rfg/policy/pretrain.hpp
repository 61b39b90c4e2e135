#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rfg/policy/likelihood.hpp"
#include "rfg/smiles/validator.hpp"

namespace rfg::policy {

struct PretrainOptions {
  int epochs = 20;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // 0 disables global-norm clipping
};

struct PretrainResult {
  std::vector<double> epoch_loss;  // token-averaged cross-entropy per epoch
  std::size_t skipped = 0;         // lines that could not be encoded
  std::size_t used = 0;
};

/// Scales all grads so their global L2 norm is at most `max_norm`.
inline void clip_grad_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  if (max_norm <= 0) return;
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  for (auto& g : grads) {
    for (double& v : g) v *= s;
  }
}

/// Mean next-token cross-entropy of a batch, tape-connected to `params`.
inline Tensor cross_entropy(const PolicyParams& params, const std::vector<Sequence>& batch,
                            std::size_t* token_count = nullptr) {
  const auto ev = evaluate_batch(params, batch);
  std::size_t tokens = 0;
  for (const auto& s : batch) tokens += s.size() - 1;
  if (token_count) *token_count = tokens;
  return num::scale(num::sum(ev.log_likelihood), -1.0 / static_cast<double>(tokens));
}

/// Next-token-prediction training with Adam over a shuffled corpus. Strings
/// with tokens outside the vocabulary, or longer than max_len, are skipped.
inline PretrainResult pretrain(PolicyParams& params, const std::vector<std::string>& corpus,
                               const PretrainOptions& opts) {
  PretrainResult result;
  std::vector<Sequence> data;
  for (const auto& s : corpus) {
    try {
      auto ids = params.vocab.encode(s);
      if (ids.size() - 1 > static_cast<std::size_t>(params.config.max_len)) {
        ++result.skipped;
        continue;
      }
      data.push_back(std::move(ids));
    } catch (const Error&) {
      ++result.skipped;
    }
  }
  if (data.empty()) throw Error("pretrain: no usable sequences in corpus");
  result.used = data.size();

  num::AdamState adam;
  adam.lr = opts.lr;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Rng rng(opts.seed, static_cast<std::uint64_t>(epoch));
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::vector<Sequence> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) {
        batch.push_back(data[order[i]]);
      }
      params.zero_grad();
      std::size_t tokens = 0;
      const Tensor loss = cross_entropy(params, batch, &tokens);
      const auto g = num::backward(loss);
      std::vector<std::vector<double>> grads;
      for (const auto& t : params.tensors) grads.push_back(g.of(t));
      clip_grad_norm(grads, opts.clip_norm);
      num::adam_step(params.tensors, grads, adam);
      loss_sum += loss.item() * static_cast<double>(tokens);
      token_sum += tokens;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(token_sum));
  }
  params.zero_grad();
  return result;
}

}  // namespace rfg::policy
