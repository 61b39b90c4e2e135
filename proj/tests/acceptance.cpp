// Acceptance runner: one PASS/FAIL line per criterion, exit status = failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rfg/cli/commands.hpp"

namespace {

using namespace rfg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances and protocol constants.
constexpr double kGradTol = 1e-4;
constexpr double kExact = 1e-12;
constexpr double kFreqTol = 0.02;
constexpr double kAucTol = 1e-9;
constexpr std::size_t kSeeds = 5;
constexpr std::size_t kBudget = 5000;
constexpr double kValidAfter = 0.90;
constexpr double kValidBefore = 0.10;
constexpr double kMaxDirectionalMinutes = 30.0;

// Desk-scale prior and agent settings for the directional experiments.
constexpr int kPriorEmbedding = 32;
constexpr int kPriorHidden = 64;
constexpr int kPriorEpochs = 35;
constexpr double kPriorLr = 5e-3;
constexpr std::size_t kPriorBatch = 32;
constexpr double kAgentLr = 2e-4;
constexpr std::size_t kAgentEnvs = 32;

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s  %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<std::string>& corpus() {
  static const auto c = smiles::read_corpus(std::string(RFG_DATA_DIR) + "/corpus.smi");
  return c;
}

double sampled_validity(const policy::PolicyParams& p, std::uint64_t seed) {
  const auto eps = policy::sample_batch(p, 1000, seed, 0);
  std::size_t v = 0;
  for (const auto& e : eps) v += smiles::is_valid(e.smiles);
  return static_cast<double>(v) / 1000.0;
}

// ------------------------------------------------------------------ 1

void gradient_correctness() {
  const auto t0 = Clock::now();
  const auto vocab = smiles::Vocabulary::from_molecules({"CCO", "c1ccccc1N"});
  policy::PolicyConfig pc;
  pc.embedding_dim = 4;
  pc.hidden_dim = 6;
  pc.max_len = 20;
  auto agent = policy::init_policy(pc, vocab, 8);
  const auto prior = policy::init_policy(pc, vocab, 77);
  rl::LossBatch batch;
  for (const char* s : {"CCO", "c1ccccc1N", "NC", "C1CC1", "OCN"}) {
    batch.sequences.push_back(vocab.encode(s));
  }
  batch.rewards = {0.9, 0.2, 0.5, 0.1, 1.0};
  batch.prior_ll = policy::log_likelihoods(prior, batch.sequences);
  batch.agent_ll = policy::log_likelihoods(agent, batch.sequences);
  rl::LossConfig cfg;
  cfg.shaping = {rl::ShapingVariant::acegen, 0.01, 2.0};
  cfg.kl_coef = 0.05;
  cfg.entropy_coef = 0.01;
  cfg.likely_penalty = 2.0;
  double worst = 0.0;
  for (auto kind : {rl::BaselineKind::loo, rl::BaselineKind::mab}) {
    auto f = [&](std::span<num::Tensor> ps) {
      policy::PolicyParams view{agent.config, agent.vocab, {ps.begin(), ps.end()}};
      rl::BaselineState state;
      state.kind = kind;
      return rl::compose_loss(view, &prior, batch, cfg, state).total;
    };
    worst = std::max(worst, num::finite_difference_check(f, agent.tensors));
  }
  const double secs = seconds_since(t0);
  report(1, "gradient correctness", worst < kGradTol && secs < 60.0,
         "max rel err " + fmt("%.2e", worst) + " on " + std::to_string(agent.parameter_count()) +
             " params, " + fmt("%.1f s", secs));
}

// ------------------------------------------------------------------ 2

void formula_suite() {
  int bad = 0, total = 0;
  auto check = [&](double got, double want) {
    ++total;
    if (!(std::fabs(got - want) <= kExact)) ++bad;
  };
  const auto loo = rl::loo_baselines(std::vector<double>{1.0, 0.0, 0.5});
  check(loo[0], 0.25);
  check(loo[1], 0.75);
  check(loo[2], 0.5);
  check(rl::acegen_reshape(0.8, -20, 0.005, 2), 0.49);
  for (double a : {1.0, 2.0, 3.0, 4.0, 5.0}) check(rl::acegen_reshape(0.3, -50, 0.01, a), 0.0);

  auto logp = [](const std::vector<double>& p) {
    std::vector<double> l;
    for (double x : p) l.push_back(std::log(x));
    return num::Tensor({1, p.size()}, std::move(l), true);
  };
  const auto p = logp({0.2, 0.3, 0.5});
  check(rl::kl_term({p}, {p.clone(true)}, 1.0).item(), 0.0);
  for (std::size_t V : {2u, 7u, 23u}) {
    std::vector<num::Tensor> steps;
    for (int t = 0; t < 5; ++t) steps.push_back(logp(std::vector<double>(V, 1.0 / V)));
    check(rl::entropy_term(steps, 0.3).item(), 0.3 * 5 * std::log(static_cast<double>(V)));
  }
  report(2, "formula unit suite", bad == 0,
         std::to_string(total - bad) + "/" + std::to_string(total) + " examples within 1e-12");
}

// ------------------------------------------------------------------ 3

void landscape() {
  long violations = 0, cells = 0;
  for (double s : {0.0, 1e-3, 5e-3, 1e-2}) {
    for (int a = 1; a <= 5; ++a) {
      for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
          ++cells;
          const double r = i / 49.0, nll = 100.0 * j / 49.0;
          const double v = rl::acegen_reshape(r, -nll, s, a);
          if (v < 0.0 || v > 1.0) ++violations;
          if (i > 0 && v < rl::acegen_reshape((i - 1) / 49.0, -nll, s, a)) ++violations;
          if (j > 0 && v > rl::acegen_reshape(r, -100.0 * (j - 1) / 49.0, s, a)) ++violations;
        }
      }
    }
  }
  report(3, "shaping landscape structure", violations == 0,
         std::to_string(violations) + " violations over " + std::to_string(cells) + " cells");
}

// ------------------------------------------------------------------ 12 (prior)

policy::PolicyParams pretrain_prior(std::uint64_t seed, double* untrained_validity) {
  policy::PolicyConfig pc;
  pc.embedding_dim = kPriorEmbedding;
  pc.hidden_dim = kPriorHidden;
  pc.max_len = 100;
  auto p = policy::init_policy(pc, smiles::Vocabulary::from_molecules(corpus()), seed);
  if (untrained_validity) *untrained_validity = sampled_validity(p, seed + 100);
  policy::PretrainOptions o;
  o.epochs = kPriorEpochs;
  o.lr = kPriorLr;
  o.batch_size = kPriorBatch;
  o.seed = seed;
  policy::pretrain(p, corpus(), o);
  return p;
}

fs::path prior_path(std::uint64_t seed) {
  return fs::path(RFG_ACCEPTANCE_DIR) /
         ("acceptance_prior_" + std::to_string(kPriorEmbedding) + "_" +
          std::to_string(kPriorHidden) + "_" + std::to_string(kPriorEpochs) + "_s" +
          std::to_string(seed) + ".ckpt");
}

void pretraining_sanity() {
  const auto t0 = Clock::now();
  std::string detail;
  bool pass = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    double before = 0.0;
    const auto p = pretrain_prior(seed, &before);
    policy::save_checkpoint(p, prior_path(seed).string());
    const double after = sampled_validity(p, seed + 100);
    pass = pass && after >= kValidAfter && before < kValidBefore;
    detail += "seed " + std::to_string(seed) + " " + fmt("%.3f", before) + "->" +
              fmt("%.3f", after) + "; ";
  }
  report(12, "pretraining sanity", pass, detail + fmt("%.0f s", seconds_since(t0)));
}

// ------------------------------------------------------------------ 4-8

struct Outcome {
  double auc = 0.0;
  double final_prior_nll = 0.0;
};

Outcome run_variant(const policy::PolicyParams& prior,
                    const std::function<void(tasks::AgentConfig&)>& tweak, std::uint64_t seed) {
  tasks::AgentConfig c;
  c.total_smiles = kBudget;
  c.num_envs = kAgentEnvs;
  c.lr = kAgentLr;
  c.experience_replay = false;
  tweak(c);
  const auto run = tasks::run_task(c, prior, tasks::make_task({}), seed);
  Outcome o;
  o.auc = metrics::top10_auc(run.log);
  for (std::size_t i = kBudget - 1000; i < kBudget; ++i) {
    o.final_prior_nll += run.log.records[i].prior_nll / 1000.0;
  }
  return o;
}

std::string series(const std::vector<Outcome>& xs, bool nll) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : " ") + fmt(nll ? "%.2f" : "%.4f", nll ? x.final_prior_nll : x.auc);
  return s;
}

void directional() {
  const auto t0 = Clock::now();
  const auto prior = policy::load_checkpoint(prior_path(0).string());
  const std::vector<std::pair<std::string, std::function<void(tasks::AgentConfig&)>>> variants = {
      {"plain", [](tasks::AgentConfig&) {}},
      {"sigma", [](tasks::AgentConfig& c) { c.loss.shaping.sigma = 1e-2; }},
      {"alpha", [](tasks::AgentConfig& c) { c.loss.shaping.alpha = 3.0; }},
      {"topk", [](tasks::AgentConfig& c) { c.loss.topk = 0.25; }},
      {"mab", [](tasks::AgentConfig& c) { c.baseline = rl::BaselineKind::mab; }},
      {"loo", [](tasks::AgentConfig& c) { c.baseline = rl::BaselineKind::loo; }},
      {"replay",
       [](tasks::AgentConfig& c) {
         c.experience_replay = true;
         c.replay_batch = 20;
         c.replay_capacity = 100;
         c.sampler = explore::Sampler::prioritized;
       }},
  };
  std::map<std::string, std::vector<Outcome>> out;
  for (const auto& [name, tweak] : variants) {
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      out[name].push_back(run_variant(prior, tweak, seed));
    }
  }
  const double minutes = seconds_since(t0) / 60.0;
  const auto& plain = out["plain"];
  auto wins = [&](const std::string& name, bool nll, bool allow_tie) {
    int w = 0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
      const auto& v = out[name][s];
      if (nll) {
        w += v.final_prior_nll < plain[s].final_prior_nll;
      } else {
        w += allow_tie ? v.auc >= plain[s].auc : v.auc > plain[s].auc;
      }
    }
    return w;
  };
  const std::string base = "plain auc [" + series(plain, false) + "]";
  const std::string timing = fmt(", all runs %.1f min", minutes);

  const int w4 = wins("sigma", true, false);
  report(4, "sigma lowers final prior NLL", w4 >= 4 && minutes < kMaxDirectionalMinutes,
         std::to_string(w4) + "/5 seeds; nll sigma [" + series(out["sigma"], true) +
             "] vs plain [" + series(plain, true) + "]" + timing);
  const int w5 = wins("alpha", false, false);
  report(5, "alpha=3 raises Top-10 AUC", w5 >= 4,
         std::to_string(w5) + "/5 seeds; alpha [" + series(out["alpha"], false) + "] " + base);
  const int w6 = wins("topk", false, false);
  report(6, "topk=0.25 raises Top-10 AUC", w6 >= 4,
         std::to_string(w6) + "/5 seeds; topk [" + series(out["topk"], false) + "] " + base);
  const int w7m = wins("mab", false, true), w7l = wins("loo", false, true);
  report(7, "MAB and LOO baselines >= plain", w7m >= 3 && w7l >= 3,
         "mab " + std::to_string(w7m) + "/5, loo " + std::to_string(w7l) + "/5; mab [" +
             series(out["mab"], false) + "] loo [" + series(out["loo"], false) + "] " + base);
  const int w8 = wins("replay", false, false);
  report(8, "prioritized replay raises AUC", w8 >= 4,
         std::to_string(w8) + "/5 seeds; replay [" + series(out["replay"], false) + "] " + base);
}

// ------------------------------------------------------------------ 9

std::vector<std::string> brute_top(const std::vector<std::pair<std::string, double>>& history,
                                   std::size_t capacity) {
  std::vector<std::pair<std::string, double>> uniq;
  std::map<std::string, bool> seen;
  for (const auto& h : history) {
    if (!seen[h.first]) {
      seen[h.first] = true;
      uniq.push_back(h);
    }
  }
  std::stable_sort(uniq.begin(), uniq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (uniq.size() > capacity) uniq.resize(capacity);
  std::vector<std::string> keys;
  for (const auto& u : uniq) keys.push_back(u.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

void replay_statistics() {
  explore::ReplayBuffer b(100, explore::Sampler::prioritized);
  const std::vector<double> rewards{0.05, 0.0, 0.3, 0.9, 0.15, 0.6, 0.0, 1.0};
  double total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    b.insert("k" + std::to_string(i), {}, rewards[i]);
    total += rewards[i];
  }
  Rng rng(42);
  const std::size_t n = 100000;
  std::vector<double> freq(rewards.size(), 0.0);
  for (auto i : b.sample_indices(n, rng)) freq[i] += 1.0 / n;
  double worst = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    worst = std::max(worst, std::fabs(freq[i] - b.entries()[i].reward / total));
  }

  std::mt19937_64 g(11);
  int mismatched = 0;
  for (int stream = 0; stream < 1000; ++stream) {
    const std::size_t capacity = 1 + g() % 120;
    const std::size_t universe = 50 + g() % 2000;
    explore::ReplayBuffer buf(capacity);
    std::vector<std::pair<std::string, double>> history;
    for (int i = 0; i < 500; ++i) {
      const auto k = g() % universe;
      const double reward = static_cast<double>(k * 2654435761ULL % 97) / 96.0;
      history.emplace_back("m" + std::to_string(k), reward);
      buf.insert(history.back().first, {}, reward);
    }
    std::vector<std::string> keys;
    for (const auto& e : buf.entries()) keys.push_back(e.key);
    std::sort(keys.begin(), keys.end());
    mismatched += keys != brute_top(history, capacity);
  }
  report(9, "replay sampling statistics", worst <= kFreqTol && mismatched == 0,
         "max |freq - R/sum R| " + fmt("%.4f", worst) + " over 1e5 draws; " +
             std::to_string(mismatched) + "/1000 streams differ from brute-force top-k");
}

// ------------------------------------------------------------------ 10

double brute_top10(const metrics::RunLog& log, std::size_t upto) {
  std::map<std::string, double> best;
  for (std::size_t i = 0; i < std::min(upto, log.size()); ++i) {
    const auto& r = log.records[i];
    if (!smiles::is_valid(r.smiles)) continue;
    const auto key = smiles::normal_form(r.smiles);
    auto it = best.find(key);
    if (it == best.end() || r.reward > it->second) best[key] = r.reward;
  }
  std::vector<double> v;
  for (const auto& [k, r] : best) v.push_back(r);
  std::sort(v.rbegin(), v.rend());
  if (v.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(10, v.size());
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += v[i];
  return s / static_cast<double>(n);
}

void metric_oracles() {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::string> junk{"C(C", "c1cc", "Q", "CC)"};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 50 + g() % 1500, budget = 100 + g() % 1600;
    metrics::RunLog log;
    log.budget = budget;
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = g() % 10 == 0 ? junk[g() % junk.size()] : corpus()[g() % 400];
      const double r = u(g);
      log.records.push_back({i, m, r, r, 30.0, 30.0, i / 64});
    }
    const std::size_t cps = (budget + 99) / 100;
    double brute = 0.0;
    for (std::size_t c = 1; c <= cps; ++c) brute += brute_top10(log, std::min({c * 100, n, budget})) / cps;
    worst = std::max(worst, std::fabs(metrics::top10_auc(log) - brute));
  }
  const double same = metrics::sediv(std::vector<std::string>(1000, "CC(=O)Nc1ccccc1"), 1000);
  std::vector<std::string> distinct;
  std::vector<smiles::Fingerprint> fps;
  for (const auto& m : corpus()) {
    const auto f = smiles::fingerprint(smiles::tokenize(m));
    if (std::all_of(fps.begin(), fps.end(),
                    [&](const auto& o) { return smiles::tanimoto(f, o) < 0.65; })) {
      fps.push_back(f);
      distinct.push_back(m);
      if (distinct.size() == 60) break;
    }
  }
  const double diff = metrics::sediv(distinct, 1000);
  report(10, "metric oracle equivalence",
         worst <= kAucTol && same == 1.0 / 1000 && diff == 1.0,
         "max AUC gap " + fmt("%.1e", worst) + " over 100 logs; sediv identical " +
             fmt("%.6g", same) + ", distinct(" + std::to_string(distinct.size()) + ") " +
             fmt("%.6g", diff));
}

// ------------------------------------------------------------------ 11

void rnd_property() {
  std::vector<smiles::Fingerprint> a, b;
  for (std::size_t i = 0; i < 64; ++i) a.push_back(smiles::fingerprint(smiles::tokenize(corpus()[i])));
  for (std::size_t i = 500; i < 564; ++i) b.push_back(smiles::fingerprint(smiles::tokenize(corpus()[i])));
  int ok = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    explore::RndConfig c;
    c.coef = 1.0;
    explore::RndState s(c, seed);
    for (int step = 0; step < 200; ++step) s.train(a);
    double ma = 0, mb = 0;
    for (double e : s.raw_errors(a)) ma += e / a.size();
    for (double e : s.raw_errors(b)) mb += e / b.size();
    ok += ma < mb;
    detail += fmt("%.2e", ma) + "<" + fmt("%.2e", mb) + " ";
  }
  report(11, "RND error lower on trained set", ok == static_cast<int>(kSeeds),
         std::to_string(ok) + "/5 seeds; A<B: " + detail);
}

// ------------------------------------------------------------------ 13

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void end_to_end_determinism() {
  const fs::path dir = fs::path(RFG_ACCEPTANCE_DIR) / "acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.conf") << "total_smiles = 1500\nnum_envs = 64\nlr = 0.0005\n"
                                       "replicates = 3\nseed = 17\nsigma = 0.001\nalpha = 3\n"
                                       "topk = 0.5\nbaseline = mab\nreplay_sampler = prioritized\n"
                                       "kl_coef = 0.01\nentropy_coef = 0.001\nrnd_coef = 0.5\n"
                                       "diversity_filter = similar\nthreads = 2\n";
  }
  auto run = [&](const std::string& out, int workers) {
    const std::string cmd = std::string(RFG_BINARY) + " optimize --config " +
                            (dir / "run.conf").string() + " --prior " + prior_path(0).string() +
                            " --out " + (dir / out).string() + " --workers " +
                            std::to_string(workers) + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
  };
  const bool ran = run("a", 1) && run("b", 1) && run("c", 3);
  std::size_t files = 0, differing = 0;
  if (ran) {
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      ++files;
      const auto name = e.path().filename();
      const auto ref = slurp(e.path());
      differing += ref != slurp(dir / "b" / name) || ref != slurp(dir / "c" / name);
    }
  }
  report(13, "end-to-end determinism", ran && files >= 7 && differing == 0,
         ran ? std::to_string(files) + " output files, " + std::to_string(differing) +
                   " differ across 2 executions and workers 1 vs 3"
             : std::string("optimize invocation failed"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  gradient_correctness();
  formula_suite();
  landscape();
  pretraining_sanity();
  directional();
  replay_statistics();
  metric_oracles();
  rnd_property();
  end_to_end_determinism();
  std::printf("%d/13 criteria passed in %.1f min\n", 13 - failures, seconds_since(t0) / 60.0);
  return failures;
}
