#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rfg/policy/model.hpp"

namespace rfg::policy {

using Sequence = std::vector<TokenId>;

/// Teacher-forced pass over a batch of GO...EOS sequences.
///
/// Rows are processed longest-first so each step only carries sequences that
/// are still running: step t holds `order[0..k_t)` where k_t is the row count
/// of step_log_probs[t].
struct BatchEvaluation {
  Tensor log_likelihood;               // [B], input order
  std::vector<Tensor> step_log_probs;  // [k_t, V]
  std::vector<std::vector<TokenId>> step_targets;
  std::vector<std::size_t> order;      // sorted row -> input index

  std::size_t batch_size() const { return order.size(); }
};

inline void check_sequence(const PolicyParams& p, const Sequence& seq) {
  if (seq.size() < 2 || seq.front() != Vocabulary::kGo) {
    throw Error("sequence must start with GO and contain at least one action");
  }
  const auto v = static_cast<TokenId>(p.vocab_size());
  for (TokenId id : seq) {
    if (id < 0 || id >= v) throw Error("unknown token id " + std::to_string(id));
  }
}

inline BatchEvaluation evaluate_batch(const PolicyParams& p, const std::vector<Sequence>& seqs) {
  using namespace num;
  if (seqs.empty()) throw Error("evaluate_batch: empty batch");
  for (const auto& s : seqs) check_sequence(p, s);

  BatchEvaluation ev;
  const std::size_t B = seqs.size();
  ev.order.resize(B);
  std::iota(ev.order.begin(), ev.order.end(), 0);
  std::stable_sort(ev.order.begin(), ev.order.end(), [&](std::size_t a, std::size_t b) {
    return seqs[a].size() > seqs[b].size();
  });
  const std::size_t steps = seqs[ev.order.front()].size() - 1;

  Hidden hidden = zero_hidden(p, B);
  Tensor total;
  std::size_t active = B;
  for (std::size_t t = 0; t < steps; ++t) {
    while (active > 0 && seqs[ev.order[active - 1]].size() - 1 <= t) --active;
    if (active < hidden.front().rows()) {
      for (auto& h : hidden) h = head_rows(h, active);
    }
    std::vector<TokenId> inputs(active), targets(active);
    for (std::size_t r = 0; r < active; ++r) {
      inputs[r] = seqs[ev.order[r]][t];
      targets[r] = seqs[ev.order[r]][t + 1];
    }
    StepOutput out = step(p, inputs, hidden);
    const Tensor picked = pad_tail(pick(out.log_probs, targets), B);
    total = t == 0 ? picked : add(total, picked);
    hidden = std::move(out.hidden);
    ev.step_log_probs.push_back(std::move(out.log_probs));
    ev.step_targets.push_back(std::move(targets));
  }
  // back to input order
  std::vector<std::size_t> inverse(B);
  for (std::size_t r = 0; r < B; ++r) inverse[ev.order[r]] = r;
  ev.log_likelihood = take(total, inverse);
  return ev;
}

/// Sum over steps of log pi(a_t | s_t), EOS included.
inline double log_likelihood(const PolicyParams& p, const Sequence& tokens) {
  return evaluate_batch(p.clone(false), {tokens}).log_likelihood[0];
}

/// Per-sequence log-likelihoods without building a tape.
inline std::vector<double> log_likelihoods(const PolicyParams& frozen,
                                           const std::vector<Sequence>& seqs) {
  if (seqs.empty()) return {};
  const auto ev = evaluate_batch(frozen, seqs);
  return {ev.log_likelihood.data().begin(), ev.log_likelihood.data().end()};
}

/// Softmax outputs of every step of one sequence (rows sum to 1).
inline std::vector<std::vector<double>> step_distributions(const PolicyParams& p,
                                                           const Sequence& tokens) {
  const auto ev = evaluate_batch(p.clone(false), {tokens});
  std::vector<std::vector<double>> out;
  for (const auto& lp : ev.step_log_probs) {
    std::vector<double> row(lp.cols());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::exp(lp[j]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace rfg::policy
