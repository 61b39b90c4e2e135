#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfg/explore.hpp"
#include "rfg/metrics.hpp"
#include "rfg/policy.hpp"
#include "rfg/rl.hpp"
#include "rfg/tasks/rewards.hpp"

namespace rfg::tasks {

/// Optimisation hyperparameters; defaults are plain REINFORCE settings.
struct AgentConfig {
  std::size_t num_envs = 128;
  std::size_t total_smiles = 10000;
  double lr = 1e-4;
  bool lr_annealing = false;
  bool experience_replay = true;
  std::size_t replay_batch = 10;
  std::size_t replay_capacity = 100;
  explore::Sampler sampler = explore::Sampler::uniform;
  rl::LossConfig loss;
  rl::BaselineKind baseline = rl::BaselineKind::none;
  double mab_decay = 0.1;
  explore::DfMode df = explore::DfMode::none;
  double df_threshold = 0.65;
  std::size_t df_bin_capacity = 25;
  double rnd_coef = 0.0;
  int threads = 1;
};

struct TaskRun {
  std::string task;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t num_envs = 0;
  metrics::RunLog log;

  metrics::MetricReport report(const metrics::MetricOptions& o = {}) const {
    return metrics::compute_report(log, o);
  }
};

namespace detail {

struct Scored {
  std::vector<double> raw;      // task score
  std::vector<double> adjusted; // after diversity filter and RND bonus
  std::vector<bool> valid;
  std::vector<std::string> keys;
  std::vector<smiles::Fingerprint> fps;
};

}  // namespace detail

/// Runs one optimisation until `total_smiles` molecules have been scored. The
/// last batch is shortened so the log holds exactly the budget. Sampling uses
/// the stream (seed, molecule index), so a run depends only on its config,
/// prior and seed.
inline TaskRun run_task(const AgentConfig& cfg, const policy::PolicyParams& prior,
                        const RewardFn& task, std::uint64_t seed) {
  if (cfg.num_envs == 0) throw Error("num_envs must be >= 1");
  TaskRun run{task.name, seed, cfg.total_smiles, cfg.num_envs, {}};
  run.log.budget = cfg.total_smiles;

  policy::PolicyParams agent = prior.clone(true);
  const policy::PolicyParams frozen_prior = prior.clone(false);
  num::AdamState adam;
  adam.lr = cfg.lr;
  explore::ReplayBuffer buffer(std::max<std::size_t>(1, cfg.replay_capacity), cfg.sampler);
  explore::DiversityMemory memory(cfg.df, cfg.df_threshold, cfg.df_bin_capacity);
  explore::RndConfig rnd_cfg;
  rnd_cfg.coef = cfg.rnd_coef;
  std::optional<explore::RndState> rnd;
  if (cfg.rnd_coef > 0.0) rnd.emplace(rnd_cfg, seed);
  rl::BaselineState baseline;
  baseline.kind = cfg.baseline;
  baseline.mab_decay = cfg.mab_decay;
  policy::SamplingOptions sampling;
  sampling.threads = cfg.threads;

  std::size_t done = 0;
  for (std::uint64_t batch_id = 0; done < cfg.total_smiles; ++batch_id) {
    const std::size_t n = std::min(cfg.num_envs, cfg.total_smiles - done);
    auto eps = policy::sample_batch(agent, n, seed, done, sampling);

    rl::LossBatch batch;
    detail::Scored s;
    for (const auto& e : eps) {
      const auto tokens = smiles::tokenize(e.smiles);
      const bool ok = smiles::validate(tokens).valid;
      s.valid.push_back(ok);
      s.keys.push_back(smiles::normal_form(e.smiles));
      s.fps.push_back(ok ? smiles::fingerprint(tokens) : smiles::Fingerprint(1024, 3));
      s.raw.push_back(ok ? task(e.smiles) : 0.0);
      batch.sequences.push_back(e.tokens);
      batch.agent_ll.push_back(e.agent_ll);
    }
    batch.prior_ll = policy::log_likelihoods(frozen_prior, batch.sequences);
    s.adjusted = s.raw;
    for (std::size_t i = 0; i < n; ++i) {
      if (s.valid[i]) s.adjusted[i] *= memory.penalty(s.keys[i], s.fps[i]);
    }
    if (rnd) {
      std::vector<smiles::Fingerprint> valid_fps;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.valid[i]) valid_fps.push_back(s.fps[i]);
      }
      const auto bonus = rnd->bonuses(valid_fps);
      for (std::size_t i = 0, j = 0; i < n; ++i) {
        if (s.valid[i]) s.adjusted[i] += bonus[j++];
      }
    }
    batch.rewards = s.adjusted;

    if (cfg.experience_replay && !buffer.empty() && cfg.replay_batch > 0) {
      Rng rng(seed ^ 0x5eedbeefULL, batch_id);
      std::vector<policy::Sequence> replay;
      for (const auto& r : buffer.sample(static_cast<long long>(cfg.replay_batch), rng)) {
        replay.push_back(r.tokens);
        batch.rewards.push_back(r.reward);
      }
      const auto pll = policy::log_likelihoods(frozen_prior, replay);
      const auto all = policy::log_likelihoods(agent.clone(false), replay);
      batch.prior_ll.insert(batch.prior_ll.end(), pll.begin(), pll.end());
      batch.agent_ll.insert(batch.agent_ll.end(), all.begin(), all.end());
      batch.sequences.insert(batch.sequences.end(), replay.begin(), replay.end());
    }

    agent.zero_grad();
    const auto parts = rl::compose_loss(agent, &frozen_prior, batch, cfg.loss, baseline);
    const auto grads = num::backward(parts.total);
    std::vector<std::vector<double>> g;
    for (const auto& t : agent.tensors) g.push_back(grads.of(t));
    if (cfg.lr_annealing) {
      adam.lr = cfg.lr * (1.0 - static_cast<double>(done) / static_cast<double>(cfg.total_smiles));
    }
    num::adam_step(agent.tensors, g, adam);

    for (std::size_t i = 0; i < n; ++i) {
      run.log.records.push_back({done + i, eps[i].smiles, s.raw[i], parts.shaped[i],
                                 -batch.prior_ll[i], -eps[i].agent_ll, batch_id});
      if (s.valid[i]) buffer.insert(s.keys[i], eps[i].tokens, s.raw[i]);
    }
    if (rnd) {
      std::vector<smiles::Fingerprint> valid_fps;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.valid[i]) valid_fps.push_back(s.fps[i]);
      }
      rnd->train(valid_fps);
    }
    done += n;
  }
  agent.zero_grad();
  return run;
}

inline TaskRun run_task(const AgentConfig& cfg, const std::string& prior_path,
                        const RewardFn& task, std::uint64_t seed) {
  return run_task(cfg, policy::load_checkpoint(prior_path), task, seed);
}

}  // namespace rfg::tasks
