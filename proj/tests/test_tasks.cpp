#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rfg/tasks.hpp"

namespace rfg::tasks {
namespace {

const std::vector<std::string>& corpus() {
  static const auto c = smiles::read_corpus(std::string(RFG_DATA_DIR) + "/corpus.smi");
  return c;
}

const policy::PolicyParams& small_prior() {
  static const policy::PolicyParams p = [] {
    policy::PolicyConfig c;
    c.embedding_dim = 16;
    c.hidden_dim = 32;
    c.max_len = 80;
    auto params = policy::init_policy(c, smiles::Vocabulary::from_molecules(corpus()), 0);
    policy::PretrainOptions o;
    o.epochs = 12;
    o.lr = 5e-3;
    o.batch_size = 32;
    policy::pretrain(params, corpus(), o);
    return params;
  }();
  return p;
}

AgentConfig fast_config(std::size_t budget) {
  AgentConfig c;
  c.num_envs = 64;
  c.total_smiles = budget;
  c.lr = 1e-3;
  c.experience_replay = false;
  return c;
}

TEST(Rewards, AromaticFraction) {
  EXPECT_EQ(reward_aromatic_frac("c1ccccc1"), 1.0);
  EXPECT_EQ(reward_aromatic_frac("CCO"), 0.0);
  EXPECT_NEAR(reward_aromatic_frac("Cc1ccccc1"), 6.0 / 7.0, 1e-15);
  EXPECT_EQ(reward_aromatic_frac("c1cccc"), 0.0);
}

TEST(Rewards, PropertyMpo) {
  const std::vector<GaussianTarget> at_center{{"heavy_atoms", 3, 2}, {"ring_closures", 0, 1}};
  EXPECT_NEAR(reward_property_mpo("CCO", at_center), 1.0, 1e-15);
  const std::vector<GaussianTarget> one_off{{"heavy_atoms", 5, 2}};
  EXPECT_NEAR(reward_property_mpo("CCO", one_off), std::exp(-0.5), 1e-15);
  const std::vector<GaussianTarget> two{{"heavy_atoms", 5, 2}, {"ring_closures", 0, 1}};
  EXPECT_NEAR(reward_property_mpo("CCO", two), std::sqrt(std::exp(-0.5)), 1e-15);
  EXPECT_EQ(reward_property_mpo("C(C", at_center), 0.0);
}

TEST(Rewards, Similarity) {
  const auto target = smiles::fingerprint(smiles::tokenize("CC(=O)Nc1ccccc1"));
  EXPECT_EQ(reward_similarity("CC(=O)Nc1ccccc1", target), 1.0);
  EXPECT_EQ(reward_similarity("CCCC", smiles::fingerprint(smiles::tokenize("[Na+].[Cl-]"))), 0.0);
  const double near = reward_similarity("CC(=O)Nc1ccncc1", target);
  EXPECT_GT(near, 0.0);
  EXPECT_LT(near, 1.0);
  const auto a = smiles::fingerprint(smiles::tokenize("CC(=O)Nc1ccncc1"));
  EXPECT_EQ(near, smiles::tanimoto(a, target));
  EXPECT_EQ(reward_similarity("C1CC", target), 0.0);
}

TEST(Rewards, MpoTargetParsing) {
  const auto t = parse_mpo_targets("heavy_atoms 20 5, hetero_fraction 0.2 0.1");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].descriptor, "hetero_fraction");
  EXPECT_EQ(t[1].width, 0.1);
  EXPECT_THROW(parse_mpo_targets("heavy_atoms 20"), Error);
  EXPECT_THROW(parse_mpo_targets("mass 20 5"), Error);
  EXPECT_THROW(parse_mpo_targets("heavy_atoms 20 0"), Error);
}

TEST(Rewards, BoundedDeterministicAndZeroWhenInvalid) {
  std::mt19937_64 g(4);
  const std::string alphabet = "CNOcno()=#123[]+-Cl";
  std::vector<std::string> mols(corpus().begin(), corpus().begin() + 200);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto n = 1 + g() % 20;
    for (std::size_t k = 0; k < n; ++k) s += alphabet[g() % alphabet.size()];
    mols.push_back(s);
  }
  for (const auto& name : task_names()) {
    TaskSpec spec;
    spec.name = name;
    const auto fn = make_task(spec);
    for (const auto& m : mols) {
      const double v = fn(m);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_EQ(v, fn(m));
      if (!smiles::is_valid(m)) {
        EXPECT_EQ(v, 0.0) << name << " " << m;
      }
    }
  }
  TaskSpec bad;
  bad.name = "jnk3";
  EXPECT_THROW(make_task(bad), Error);
  bad.name = "similarity";
  bad.similarity_target = "C(C";
  EXPECT_THROW(make_task(bad), Error);
}

TEST(RunTask, ZeroBudget) {
  const auto run = run_task(fast_config(0), small_prior(), make_task({}), 1);
  EXPECT_TRUE(run.log.empty());
  EXPECT_THROW(run.report(), Error);
}

TEST(RunTask, OneRecordPerScoredMolecule) {
  auto cfg = fast_config(150);
  cfg.num_envs = 64;
  cfg.experience_replay = true;
  cfg.replay_batch = 5;
  cfg.baseline = rl::BaselineKind::loo;
  const auto task = make_task({});
  const auto run = run_task(cfg, small_prior(), task, 3);
  ASSERT_EQ(run.log.size(), 150u);
  for (std::size_t i = 0; i < run.log.size(); ++i) {
    const auto& r = run.log.records[i];
    EXPECT_EQ(r.index, i);
    EXPECT_EQ(r.batch, i / 64);
    EXPECT_EQ(r.reward, task(r.smiles));
    EXPECT_GT(r.prior_nll, 0.0);
    EXPECT_GT(r.agent_nll, 0.0);
  }
  // The first batch comes from the untouched agent, which equals the prior.
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_NEAR(run.log.records[i].prior_nll, run.log.records[i].agent_nll, 1e-9);
  }
}

TEST(RunTask, SameSeedSameLog) {
  auto cfg = fast_config(300);
  cfg.experience_replay = true;
  cfg.sampler = explore::Sampler::prioritized;
  cfg.df = explore::DfMode::similar;
  cfg.rnd_coef = 0.5;
  cfg.loss.kl_coef = 0.01;
  cfg.loss.entropy_coef = 0.001;
  cfg.loss.likely_penalty = 10;
  cfg.baseline = rl::BaselineKind::mab;
  cfg.lr_annealing = true;
  const auto task = make_task({});
  const auto a = run_task(cfg, small_prior(), task, 11);
  const auto b = run_task(cfg, small_prior(), task, 11);
  EXPECT_EQ(a.log.records, b.log.records);
  cfg.threads = 3;
  const auto c = run_task(cfg, small_prior(), task, 11);
  EXPECT_EQ(a.log.records, c.log.records);
  const auto d = run_task(cfg, small_prior(), task, 12);
  EXPECT_NE(a.log.records, d.log.records);
}

TEST(RunTask, DiversityFilterZeroesRepeats) {
  auto cfg = fast_config(256);
  cfg.df = explore::DfMode::unique;
  cfg.lr = 0.0;
  const auto run = run_task(cfg, small_prior(), make_task({}), 2);
  std::set<std::string> seen;
  for (const auto& r : run.log.records) {
    const auto key = smiles::normal_form(r.smiles);
    if (smiles::is_valid(r.smiles) && !seen.insert(key).second) {
      EXPECT_EQ(r.shaped_reward, 0.0) << r.smiles;
    }
  }
}

TEST(RunTask, MissingPriorCheckpoint) {
  EXPECT_THROW(run_task(fast_config(10), "/nonexistent/prior.ckpt", make_task({}), 0), Error);
}

// Plain REINFORCE improves the mean reward of later samples.
TEST(RunTask, PlainReinforceLearns) {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto run = run_task(fast_config(5000), small_prior(), make_task({}), seed);
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      first += run.log.records[i].reward;
      last += run.log.records[4000 + i].reward;
    }
    if (last > first) ++improved;
  }
  EXPECT_GE(improved, 4);
}

}  // namespace
}  // namespace rfg::tasks
