#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "rfg/policy/likelihood.hpp"
#include "rfg/rl/regularizers.hpp"
#include "rfg/rl/reinforce.hpp"
#include "rfg/rl/shaping.hpp"

namespace rfg::rl {

struct LossConfig {
  ShapingConfig shaping;
  double topk = 1.0;
  double kl_coef = 0.0;
  double entropy_coef = 0.0;
  double likely_penalty = 0.0;
};

/// One update batch. `rewards` already carry the diversity-filter penalty and
/// the RND bonus; `agent_ll` is the agent likelihood before this update.
struct LossBatch {
  std::vector<policy::Sequence> sequences;
  std::vector<double> rewards;
  std::vector<double> prior_ll;
  std::vector<double> agent_ll;

  std::size_t size() const { return sequences.size(); }
};

struct LossParts {
  Tensor total;
  double reinforce = 0.0;
  double kl = 0.0;
  double entropy = 0.0;
  double likely = 0.0;
  std::vector<std::size_t> kept;  // batch indices that entered the loss
  std::vector<double> shaped;     // per batch index
  std::vector<double> baselines;  // per kept episode
};

inline std::vector<double> shape_rewards(const ShapingConfig& c, const LossBatch& b) {
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = reshape(c, b.rewards[i], b.prior_ll[i], b.agent_ll[i]);
  }
  return out;
}

/// hill-climb -> shaping -> baseline -> REINFORCE, then + KL - ENT + ALL.
/// KL, ENT and ALL are averaged over the kept episodes like the REINFORCE
/// term. `prior` may be null when kl_coef is 0.
inline LossParts compose_loss(const policy::PolicyParams& agent,
                              const policy::PolicyParams* prior, const LossBatch& batch,
                              const LossConfig& cfg, BaselineState& baseline) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error("compose_loss: empty batch");
  if (batch.rewards.size() != n || batch.prior_ll.size() != n || batch.agent_ll.size() != n) {
    throw ShapeError("compose_loss: batch columns have different lengths");
  }
  LossParts out;
  out.kept = hill_climb_filter(batch.rewards, cfg.topk);
  out.shaped = shape_rewards(cfg.shaping, batch);

  std::vector<policy::Sequence> seqs;
  std::vector<double> shaped;
  for (std::size_t i : out.kept) {
    seqs.push_back(batch.sequences[i]);
    shaped.push_back(out.shaped[i]);
  }
  const std::size_t k = seqs.size();
  const double mean_shaped = std::accumulate(shaped.begin(), shaped.end(), 0.0) / k;
  switch (baseline.kind) {
    case BaselineKind::mab:
      out.baselines.assign(k, mab_update(baseline, mean_shaped));
      break;
    case BaselineKind::loo:
      out.baselines = k > 1 ? loo_baselines(shaped) : std::vector<double>(k, 0.0);
      break;
    default:
      out.baselines.assign(k, 0.0);
  }

  const auto ev = policy::evaluate_batch(agent, seqs);
  Tensor total = reinforce_loss(ev.log_likelihood, shaped, out.baselines);
  out.reinforce = total.item();
  const double inv_k = 1.0 / static_cast<double>(k);
  if (cfg.kl_coef > 0.0) {
    if (!prior) throw Error("compose_loss: KL term needs the prior policy");
    const auto pev = policy::evaluate_batch(prior->clone(false), seqs);
    const Tensor kl = num::scale(kl_term(pev.step_log_probs, ev.step_log_probs, cfg.kl_coef), inv_k);
    out.kl = kl.item();
    total = num::add(total, kl);
  }
  if (cfg.entropy_coef > 0.0) {
    const Tensor ent = num::scale(entropy_term(ev.step_log_probs, cfg.entropy_coef), inv_k);
    out.entropy = ent.item();
    total = num::sub(total, ent);
  }
  if (cfg.likely_penalty > 0.0) {
    const Tensor all = num::mean(all_term(ev.log_likelihood, cfg.likely_penalty));
    out.likely = all.item();
    total = num::add(total, all);
  }
  out.total = total;
  return out;
}

}  // namespace rfg::rl
