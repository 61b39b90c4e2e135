#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rfg/policy.hpp"
#include "rfg/smiles.hpp"

namespace rfg::policy {
namespace {

const std::vector<std::string>& corpus() {
  static const auto c = smiles::read_corpus(std::string(RFG_DATA_DIR) + "/corpus.smi");
  return c;
}

Vocabulary corpus_vocab() { return Vocabulary::from_molecules(corpus()); }

PolicyConfig tiny_config() {
  PolicyConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 5;
  c.max_len = 12;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rfg_policy_" + name)).string();
}

bool same_params(const PolicyParams& a, const PolicyParams& b) {
  if (a.tensors.size() != b.tensors.size()) return false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    const auto x = a.tensors[i].data(), y = b.tensors[i].data();
    if (!std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
  }
  return true;
}

TEST(Init, DeterministicPerSeed) {
  const auto v = corpus_vocab();
  PolicyConfig c;
  EXPECT_TRUE(same_params(init_policy(c, v, 3), init_policy(c, v, 3)));
  EXPECT_FALSE(same_params(init_policy(c, v, 3), init_policy(c, v, 4)));
  const auto p = init_policy(c, v, 3);
  const double k = 1.0 / std::sqrt(128.0);
  for (const auto& t : p.tensors) {
    for (double x : t.data()) {
      EXPECT_LE(std::abs(x), k);
    }
  }
}

TEST(Init, RejectsBadConfig) {
  PolicyConfig c;
  c.max_len = 1;
  EXPECT_THROW(init_policy(c, corpus_vocab(), 0), Error);
  c = PolicyConfig{};
  c.hidden_dim = 0;
  EXPECT_THROW(init_policy(c, corpus_vocab(), 0), Error);
}

// Monte-Carlo over 1,000 sampled episodes: mean per-step entropy of a fresh
// policy sits near the maximum ln|A|.
TEST(Init, FreshPolicyIsNearlyUniform) {
  PolicyConfig c;
  c.embedding_dim = 16;
  c.hidden_dim = 32;
  const auto p = init_policy(c, corpus_vocab(), 1);
  const auto eps = sample_batch(p, 1000, 9);
  double entropy = 0.0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < eps.size(); i += 10) {
    for (const auto& row : step_distributions(p, eps[i].tokens)) {
      for (double q : row) {
        if (q > 0) entropy -= q * std::log(q);
      }
      ++steps;
    }
  }
  const double max_entropy = std::log(static_cast<double>(action_count(p)));
  EXPECT_NEAR(entropy / static_cast<double>(steps), max_entropy, 0.1 * max_entropy);
}

TEST(Sampling, GreedyIsDeterministic) {
  const auto p = init_policy(PolicyConfig{}, corpus_vocab(), 2);
  SamplingOptions greedy;
  greedy.greedy = true;
  const auto a = sample_batch(p, 3, 1, 0, greedy);
  const auto b = sample_batch(p, 3, 99, 50, greedy);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].tokens, b[0].tokens);
  }
}

TEST(Sampling, EmptyBatch) {
  EXPECT_TRUE(sample_batch(init_policy(tiny_config(), corpus_vocab(), 0), 0, 1).empty());
}

// With every logit equal the first action is uniform over the action set;
// each count must sit within 3 sigma of n/|A| (multinomial oracle).
TEST(Sampling, EqualLogitsGiveUniformFirstToken) {
  auto p = init_policy(tiny_config(), corpus_vocab(), 0);
  for (double& w : p.tensors[p.tensors.size() - 2].mutable_data()) w = 0.0;
  for (double& b : p.tensors.back().mutable_data()) b = 0.0;
  const std::size_t n = 10000;
  const auto eps = sample_batch(p, n, 17);
  std::map<TokenId, int> counts;
  for (const auto& e : eps) ++counts[e.tokens[1]];
  const double k = static_cast<double>(action_count(p));
  const double mean = n / k;
  const double sigma = std::sqrt(n * (1.0 / k) * (1.0 - 1.0 / k));
  EXPECT_EQ(counts.count(Vocabulary::kGo), 0u);
  EXPECT_EQ(counts.size(), action_count(p));
  for (const auto& [tok, cnt] : counts) {
    EXPECT_LE(std::abs(cnt - mean), 3 * sigma) << "token " << tok;
  }
}

TEST(Sampling, RespectsMaxLen) {
  auto c = tiny_config();
  c.max_len = 6;
  const auto p = init_policy(c, corpus_vocab(), 4);
  for (const auto& e : sample_batch(p, 500, 3)) {
    ASSERT_EQ(e.log_probs.size(), e.tokens.size() - 1);
    EXPECT_LE(e.log_probs.size(), 6u);
    if (e.log_probs.size() < 6u) {
      EXPECT_TRUE(e.terminated());
    }
    EXPECT_NEAR(e.agent_ll, e.sum_log_probs(), 0.0);
  }
}

TEST(Sampling, ThreadCountAndBatchingInvariance) {
  PolicyConfig c;
  c.embedding_dim = 8;
  c.hidden_dim = 16;
  const auto p = init_policy(c, corpus_vocab(), 5);
  const auto serial = sample_batch(p, 40, 123, 1000);
  SamplingOptions par;
  par.threads = 4;
  const auto parallel = sample_batch(p, 40, 123, 1000, par);
  const auto tail = sample_batch(p, 15, 123, 1025);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].tokens, parallel[i].tokens);
    EXPECT_EQ(serial[i].log_probs, parallel[i].log_probs);
  }
  for (std::size_t i = 0; i < tail.size(); ++i) {
    EXPECT_EQ(serial[25 + i].tokens, tail[i].tokens);
    EXPECT_EQ(serial[25 + i].log_probs, tail[i].log_probs);
  }
}

TEST(Likelihood, UniformSingleAction) {
  auto p = init_policy(tiny_config(), corpus_vocab(), 0);
  for (double& w : p.tensors[p.tensors.size() - 2].mutable_data()) w = 0.0;
  for (double& b : p.tensors.back().mutable_data()) b = 0.0;
  const double ll = log_likelihood(p, {Vocabulary::kGo, Vocabulary::kEos});
  EXPECT_NEAR(ll, -std::log(static_cast<double>(action_count(p))), 1e-12);
}

TEST(Likelihood, MatchesStepDistributionsAndSampledLogProbs) {
  const auto p = init_policy(PolicyConfig{}, corpus_vocab(), 6);
  for (const auto& e : sample_batch(p, 5, 8)) {
    const auto dists = step_distributions(p, e.tokens);
    ASSERT_EQ(dists.size(), e.tokens.size() - 1);
    double s = 0.0;
    for (std::size_t t = 0; t < dists.size(); ++t) {
      double row = 0.0;
      for (double q : dists[t]) {
        EXPECT_GE(q, 0.0);
        row += q;
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
      s += std::log(dists[t][e.tokens[t + 1]]);
    }
    const double ll = log_likelihood(p, e.tokens);
    EXPECT_NEAR(ll, s, 1e-9);
    EXPECT_NEAR(ll, e.agent_ll, 1e-9);
  }
}

TEST(Likelihood, PriorAndAgentCopiesAgree) {
  const auto prior = init_policy(PolicyConfig{}, corpus_vocab(), 6);
  const auto agent = prior.clone(true);
  const auto seq = prior.vocab.encode("c1ccccc1CCO");
  EXPECT_EQ(log_likelihood(prior, seq), log_likelihood(agent, seq));
}

TEST(Likelihood, BatchMatchesSingles) {
  const auto p = init_policy(tiny_config(), corpus_vocab(), 2);
  std::vector<Sequence> seqs;
  for (const char* s : {"CCO", "c1ccccc1", "C", "CC(=O)N"}) seqs.push_back(p.vocab.encode(s));
  const auto batch = log_likelihoods(p.clone(false), seqs);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    EXPECT_NEAR(batch[i], log_likelihood(p, seqs[i]), 1e-12);
  }
}

TEST(Likelihood, UnknownTokenId) {
  const auto p = init_policy(tiny_config(), corpus_vocab(), 2);
  EXPECT_THROW(log_likelihood(p, {Vocabulary::kGo, 999}), Error);
  EXPECT_THROW(log_likelihood(p, {3, 4}), Error);
}

// Gradient of the pre-training loss through a <=500 parameter GRU.
TEST(Pretrain, CrossEntropyGradientMatchesFiniteDifferences) {
  const auto v = Vocabulary::from_molecules({"CCO", "c1ccccc1N"});
  PolicyConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 6;
  c.max_len = 20;
  auto p = init_policy(c, v, 12);
  ASSERT_LE(p.parameter_count(), 500u);
  const std::vector<Sequence> batch = {v.encode("CCO"), v.encode("c1ccccc1N"), v.encode("NC")};
  auto f = [&](std::span<Tensor> params) {
    PolicyParams view{p.config, p.vocab, {params.begin(), params.end()}};
    return cross_entropy(view, batch);
  };
  EXPECT_LT(num::finite_difference_check(f, p.tensors, 1e-5), 1e-4);
}

TEST(Pretrain, MemorisesSingleString) {
  const std::vector<std::string> one(8, "CC(=O)Nc1ccccc1");
  PolicyConfig c;
  c.embedding_dim = 8;
  c.hidden_dim = 16;
  auto p = init_policy(c, Vocabulary::from_molecules(one), 3);
  PretrainOptions o;
  o.epochs = 200;
  o.lr = 1e-2;
  o.batch_size = 8;
  const auto r = pretrain(p, one, o);
  EXPECT_LT(r.epoch_loss.back(), 0.01);
  SamplingOptions greedy;
  greedy.greedy = true;
  EXPECT_EQ(sample_batch(p, 1, 0, 0, greedy)[0].smiles, "CC(=O)Nc1ccccc1");
}

TEST(Pretrain, EarlyEpochLossDecreases) {
  for (std::uint64_t seed : {0, 1, 2}) {
    PolicyConfig c;
    c.embedding_dim = 16;
    c.hidden_dim = 32;
    auto p = init_policy(c, corpus_vocab(), seed);
    PretrainOptions o;
    o.epochs = 5;
    o.lr = 5e-3;
    o.batch_size = 64;
    o.seed = seed;
    const auto r = pretrain(p, corpus(), o);
    int violations = 0;
    for (std::size_t i = 1; i < r.epoch_loss.size(); ++i) {
      if (r.epoch_loss[i] > r.epoch_loss[i - 1]) ++violations;
    }
    EXPECT_LE(violations, 1) << "seed " << seed;
  }
}

TEST(Pretrain, ZeroLearningRateLeavesParams) {
  auto p = init_policy(tiny_config(), corpus_vocab(), 3);
  const auto before = p.clone(false);
  PretrainOptions o;
  o.epochs = 3;
  o.lr = 0.0;
  o.batch_size = 100;
  std::vector<std::string> small(corpus().begin(), corpus().begin() + 200);
  const auto r = pretrain(p, small, o);
  EXPECT_TRUE(same_params(p, before));
  EXPECT_NEAR(r.epoch_loss[0], r.epoch_loss[1], 1e-12);
  EXPECT_NEAR(r.epoch_loss[0], r.epoch_loss[2], 1e-12);
}

TEST(Pretrain, SkipsUnencodableLines) {
  auto p = init_policy(tiny_config(), Vocabulary::from_molecules({"CCO"}), 3);
  PretrainOptions o;
  o.epochs = 1;
  const auto r = pretrain(p, {"CCO", "CCN", "OCC", "C[Na]"}, o);
  EXPECT_EQ(r.skipped, 2u);
  EXPECT_EQ(r.used, 2u);
  EXPECT_THROW(pretrain(p, {"NNN"}, o), Error);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  auto c = tiny_config();
  c.output_hidden = 3;
  const auto p = init_policy(c, corpus_vocab(), 21);
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(p, path);
  const auto q = load_checkpoint(path);
  EXPECT_EQ(q.config, p.config);
  EXPECT_EQ(q.vocab, p.vocab);
  EXPECT_TRUE(same_params(p, q));
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "RFG1");
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptMagicAndTruncation) {
  const auto p = init_policy(tiny_config(), corpus_vocab(), 21);
  const auto path = temp_path("corrupt.ckpt");
  save_checkpoint(p, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  std::string bad = bytes;
  bad[0] = 'X';
  write(bad);
  EXPECT_THROW(load_checkpoint(path), Error);
  write(bytes.substr(0, bytes.size() - 5));
  try {
    load_checkpoint(path);
    FAIL() << "expected truncation error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  std::string version = bytes;
  version[4] = 7;
  write(version);
  EXPECT_THROW(load_checkpoint(path), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), Error);
}

TEST(Checkpoint, CrossConfigLoadNamesField) {
  const auto p = init_policy(tiny_config(), corpus_vocab(), 21);
  const auto path = temp_path("cross.ckpt");
  save_checkpoint(p, path);
  auto other = tiny_config();
  other.hidden_dim = 7;
  try {
    load_checkpoint(path, other);
    FAIL() << "expected shape error";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("hidden_dim"), std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rfg::policy
