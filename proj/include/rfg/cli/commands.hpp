#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rfg/cli/config.hpp"
#include "rfg/cli/svg.hpp"
#include "rfg/cli/sweep.hpp"

namespace rfg::cli {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// Runs job(i) for i in [0, n) on up to `workers` threads; the first
/// exception (lowest index) is rethrown after all threads join.
template <typename Job>
void parallel_for(std::size_t n, std::size_t workers, Job job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

/// Sample standard deviation (n-1); zero for a single value.
inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

struct Summary {
  std::vector<std::string> names;
  std::vector<metrics::MetricReport> reports;

  std::vector<MeanStd> aggregate() const {
    std::vector<MeanStd> out;
    if (reports.empty()) return out;
    const auto n_fields = reports.front().fields().size();
    for (std::size_t f = 0; f < n_fields; ++f) {
      std::vector<double> xs;
      for (const auto& r : reports) xs.push_back(r.fields()[f].second);
      out.push_back(mean_std(xs));
    }
    return out;
  }

  /// One row per log, then mean and std rows.
  std::string csv() const {
    std::string s = std::string("log,") + metrics::MetricReport::kCsvHeader + "\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      s += metrics::detail::csv_field(names[i]) + "," + reports[i].csv_row() + "\n";
    }
    const auto agg = aggregate();
    std::string mean = "mean", sd = "std";
    for (const auto& m : agg) {
      mean += "," + metrics::format_double(m.mean);
      sd += "," + metrics::format_double(m.std);
    }
    return s + mean + "\n" + sd + "\n";
  }

  std::string kv() const {
    std::string s = "logs=" + std::to_string(reports.size()) + "\n";
    const auto agg = aggregate();
    if (agg.empty()) return s;
    const auto fields = reports.front().fields();
    for (std::size_t f = 0; f < agg.size(); ++f) {
      s += fields[f].first + "=" + metrics::format_double(agg[f].mean) + "\n";
      s += fields[f].first + "_std=" + metrics::format_double(agg[f].std) + "\n";
    }
    return s;
  }
};

// ---------------------------------------------------------------- pretrain

inline policy::PolicyParams cmd_pretrain(const std::string& corpus_path, const std::string& out_path,
                                         const std::optional<std::string>& config_path,
                                         std::ostream& out) {
  RunConfig cfg = config_path ? parse_config_file(*config_path) : RunConfig{};
  apply_env_seed(cfg);
  const auto corpus = smiles::read_corpus(corpus_path);
  if (corpus.empty()) throw Error("corpus '" + corpus_path + "' holds no molecules");
  auto params = policy::init_policy(cfg.policy, smiles::Vocabulary::from_molecules(corpus), cfg.seed);

  auto opts = cfg.pretrain;
  opts.seed = cfg.seed;
  const auto result = policy::pretrain(params, corpus, opts);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << metrics::format_double(result.epoch_loss[e]) << "\n";
  }
  if (result.skipped) out << "skipped " << result.skipped << " corpus lines\n";

  const auto episodes = policy::sample_batch(params, 1000, cfg.seed, 0);
  std::size_t valid = 0;
  for (const auto& e : episodes) valid += smiles::is_valid(e.smiles);
  out << "sampled validity " << metrics::format_double(static_cast<double>(valid) / 1000.0)
      << "\n";
  policy::save_checkpoint(params, out_path);
  out << "wrote " << out_path << "\n";
  return params;
}

// --------------------------------------------------------------- landscape

struct LandscapeGrid {
  std::vector<double> rewards;     // x axis
  std::vector<double> prior_nlls;  // y axis
};

inline LandscapeGrid default_landscape_grid() {
  LandscapeGrid g;
  for (int i = 0; i <= 50; ++i) g.rewards.push_back(i / 50.0);
  for (int j = 0; j <= 50; ++j) g.prior_nlls.push_back(2.0 * j);
  return g;
}

inline void cmd_landscape(const std::string& variant, const std::string& out_dir,
                          std::ostream& out) {
  if (variant != "acegen" && variant != "reinvent") {
    throw Error("landscape variant must be reinvent or acegen, got '" + variant + "'");
  }
  make_dir(out_dir);
  const auto g = default_landscape_grid();
  const bool acegen = variant == "acegen";
  const std::vector<double> sigmas =
      acegen ? std::vector<double>{0.0, 1e-3, 5e-3, 1e-2} : std::vector<double>{30, 60, 120};
  const std::vector<double> seconds =
      acegen ? std::vector<double>{1, 2, 3, 4, 5} : std::vector<double>{10, 30, 60};
  const std::string second_name = acegen ? "alpha" : "agent_nll";

  std::string csv = "sigma," + second_name + ",reward,prior_nll,value\n";
  std::size_t panels = 0;
  for (double sigma : sigmas) {
    for (double second : seconds) {
      std::vector<std::vector<double>> values(g.prior_nlls.size(),
                                              std::vector<double>(g.rewards.size()));
      for (std::size_t j = 0; j < g.prior_nlls.size(); ++j) {
        for (std::size_t i = 0; i < g.rewards.size(); ++i) {
          const double r = g.rewards[i], nll = g.prior_nlls[j];
          const double v = acegen ? rl::acegen_reshape(r, -nll, sigma, second)
                                  : rl::reinvent_reshape(r, -nll, -second, sigma);
          values[j][i] = v;
          csv += metrics::format_double(sigma) + "," + metrics::format_double(second) + "," +
                 metrics::format_double(r) + "," + metrics::format_double(nll) + "," +
                 metrics::format_double(v) + "\n";
        }
      }
      const std::string tag = variant + "_sigma" + metrics::format_double(sigma) + "_" +
                              second_name + metrics::format_double(second);
      const std::string title = variant + ": sigma=" + metrics::format_double(sigma) + ", " +
                                second_name + "=" + metrics::format_double(second);
      write_file(fs::path(out_dir) / (tag + ".svg"),
                 svg::heatmap(values, title, "reward", "prior NLL", g.rewards.front(),
                              g.rewards.back(), g.prior_nlls.front(), g.prior_nlls.back()));
      ++panels;
    }
  }
  write_file(fs::path(out_dir) / ("landscape_" + variant + ".csv"), csv);
  out << "wrote landscape_" << variant << ".csv and " << panels << " heatmaps to " << out_dir
      << "\n";
}

// ---------------------------------------------------------------- optimize

struct CurvePoint {
  std::size_t molecules = 0;
  MeanStd reward, prior_nll;
};

/// Window means of raw reward and prior NLL, aggregated over replicates.
inline std::vector<CurvePoint> learning_curve(const std::vector<metrics::RunLog>& logs,
                                              std::size_t window = 100) {
  std::vector<CurvePoint> out;
  if (logs.empty() || window == 0) return out;
  std::size_t shortest = logs.front().records.size();
  for (const auto& l : logs) shortest = std::min(shortest, l.records.size());
  for (std::size_t begin = 0; begin < shortest; begin += window) {
    const std::size_t end = std::min(shortest, begin + window);
    std::vector<double> rs, ns;
    for (const auto& l : logs) {
      double r = 0.0, n = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        r += l.records[i].reward;
        n += l.records[i].prior_nll;
      }
      rs.push_back(r / static_cast<double>(end - begin));
      ns.push_back(n / static_cast<double>(end - begin));
    }
    out.push_back({end, mean_std(rs), mean_std(ns)});
  }
  return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string s = "molecules,reward_mean,reward_std,prior_nll_mean,prior_nll_std\n";
  for (const auto& p : curve) {
    s += std::to_string(p.molecules) + "," + metrics::format_double(p.reward.mean) + "," +
         metrics::format_double(p.reward.std) + "," + metrics::format_double(p.prior_nll.mean) +
         "," + metrics::format_double(p.prior_nll.std) + "\n";
  }
  return s;
}

inline std::string curve_svg(const std::vector<CurvePoint>& curve, const std::string& task) {
  svg::Series reward{"reward", {}, {}, {}, "#1f77b4"};
  svg::Series nll{"prior NLL", {}, {}, {}, "#d62728"};
  for (const auto& p : curve) {
    const double x = static_cast<double>(p.molecules);
    reward.x.push_back(x);
    reward.mean.push_back(p.reward.mean);
    reward.std.push_back(p.reward.std);
    nll.x.push_back(x);
    nll.mean.push_back(p.prior_nll.mean);
    nll.std.push_back(p.prior_nll.std);
  }
  std::string body = svg::line_panel({reward}, task + ": reward", "molecules evaluated", "reward");
  body += svg::line_panel({nll}, task + ": prior NLL", "molecules evaluated", "prior NLL", 290);
  return svg::document(body, 620, 580);
}

struct OptimizeResult {
  std::vector<tasks::TaskRun> runs;
  Summary summary;
};

/// Replicate r uses seed + r and writes run_<r>.csv.
inline OptimizeResult optimize(const RunConfig& cfg, const policy::PolicyParams& prior,
                               const std::string& out_dir, std::size_t workers) {
  make_dir(out_dir);
  const auto task = tasks::make_task(cfg.task);
  OptimizeResult res;
  res.runs.resize(cfg.replicates);
  parallel_for(cfg.replicates, workers, [&](std::size_t r) {
    res.runs[r] = tasks::run_task(cfg.agent, prior, task, cfg.seed + r);
  });
  const auto opts = metric_options(cfg);
  std::vector<metrics::RunLog> logs;
  for (std::size_t r = 0; r < res.runs.size(); ++r) {
    const auto name = "run_" + std::to_string(r) + ".csv";
    std::ostringstream csv;
    metrics::write_csv(res.runs[r].log, csv);
    write_file(fs::path(out_dir) / name, csv.str());
    res.summary.names.push_back(name);
    if (res.runs[r].log.records.empty()) {
      res.summary.reports.push_back({});
    } else {
      res.summary.reports.push_back(metrics::compute_report(res.runs[r].log, opts));
    }
    logs.push_back(res.runs[r].log);
  }
  write_file(fs::path(out_dir) / "metrics.csv", res.summary.csv());
  write_file(fs::path(out_dir) / "metrics.txt", res.summary.kv());
  const auto curve = learning_curve(logs);
  write_file(fs::path(out_dir) / "curve.csv", curve_csv(curve));
  write_file(fs::path(out_dir) / "curve.svg", curve_svg(curve, cfg.task.name));
  return res;
}

inline OptimizeResult cmd_optimize(const std::string& config_path, const std::string& prior_path,
                                   const std::string& out_dir, std::size_t workers,
                                   std::ostream& out) {
  RunConfig cfg = parse_config_file(config_path);
  apply_env_seed(cfg);
  const auto prior = policy::load_checkpoint(prior_path);
  auto res = optimize(cfg, prior, out_dir, workers);
  out << "task " << cfg.task.name << ", " << cfg.replicates << " replicate(s), seed " << cfg.seed
      << "\n";
  out << res.summary.csv();
  return res;
}

// ------------------------------------------------------------------ report

inline Summary cmd_report(const std::vector<std::string>& paths, std::size_t budget,
                          std::ostream& out, std::ostream& warn) {
  if (paths.empty()) throw Error("report: no log files given");
  Summary s;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open run log '" + p + "'");
    metrics::RunLog log;
    try {
      log = metrics::read_csv(in, budget);
    } catch (const Error& e) {
      throw Error(p + ": " + e.what());
    }
    if (log.records.empty()) throw Error(p + ": run log holds no records");
    if (log.records.size() < budget) {
      warn << "warning: " << p << " has " << log.records.size() << " of " << budget
           << " molecules; metrics cover the available prefix\n";
    }
    s.names.push_back(fs::path(p).filename().string());
    s.reports.push_back(metrics::compute_report(log));
  }
  out << s.csv();
  return s;
}

// ------------------------------------------------------------------- sweep

struct SweepRow {
  std::size_t config_id = 0;
  std::uint64_t grid_index = 0;
  std::vector<std::string> values;  // one per grid axis
  std::vector<double> task_scores;  // one per task
  double mean_score = 0.0;
};

/// Rows sorted by mean score, descending; ties keep config order.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const policy::PolicyParams& prior,
                                       const std::string& out_dir, std::size_t workers) {
  const auto indices = sample_grid_indices(spec.grid, spec.num_samples, spec.seed);
  const fs::path log_dir = fs::path(out_dir) / "logs";
  make_dir(log_dir);

  std::vector<SweepRow> rows(indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    rows[c].config_id = c;
    rows[c].grid_index = indices[c];
    const auto pick = grid_point(spec.grid, indices[c]);
    for (std::size_t a = 0; a < spec.grid.size(); ++a) {
      rows[c].values.push_back(spec.grid[a].values[pick[a]]);
    }
    rows[c].task_scores.resize(spec.tasks.size());
  }

  const std::size_t n_tasks = spec.tasks.size();
  parallel_for(indices.size() * n_tasks, workers, [&](std::size_t job) {
    const std::size_t c = job / n_tasks, t = job % n_tasks;
    RunConfig cfg = sweep_config(spec, indices[c]);
    cfg.task.name = spec.tasks[t];
    const auto run = tasks::run_task(cfg.agent, prior, tasks::make_task(cfg.task), spec.seed);
    std::ostringstream csv;
    metrics::write_csv(run.log, csv);
    write_file(log_dir / ("config_" + std::to_string(c) + "_" + spec.tasks[t] + ".csv"),
               csv.str());
    double score = 0.0;
    if (!run.log.records.empty()) {
      for (const auto& [k, v] : metrics::compute_report(run.log, metric_options(cfg)).fields()) {
        if (k == spec.metric) score = v;
      }
    }
    rows[c].task_scores[t] = score;
  });

  for (auto& r : rows) {
    double s = 0.0;
    for (double x : r.task_scores) s += x;
    r.mean_score = s / static_cast<double>(n_tasks);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.mean_score > b.mean_score; });

  std::string csv = "rank,config_id,mean_" + spec.metric;
  for (const auto& t : spec.tasks) csv += "," + t + "_" + spec.metric;
  for (const auto& a : spec.grid) csv += "," + a.key;
  csv += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += std::to_string(i + 1) + "," + std::to_string(rows[i].config_id) + "," +
           metrics::format_double(rows[i].mean_score);
    for (double x : rows[i].task_scores) csv += "," + metrics::format_double(x);
    for (const auto& v : rows[i].values) csv += "," + metrics::detail::csv_field(v);
    csv += "\n";
  }
  write_file(fs::path(out_dir) / "results.csv", csv);
  return rows;
}

inline std::vector<SweepRow> cmd_sweep(const std::string& spec_path, const std::string& out_dir,
                                       std::size_t workers, std::ostream& out) {
  std::ifstream in(spec_path);
  if (!in) throw ConfigError("cannot open sweep spec '" + spec_path + "'");
  auto spec = parse_sweep_spec(in, spec_path, fs::path(spec_path).parent_path());
  if (const char* s = std::getenv("RNG_SEED"); s && *s) {
    try {
      detail::set_count(spec.seed, s, 0, "RNG_SEED");
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("RNG_SEED: ") + e.what());
    }
  }
  const auto prior = policy::load_checkpoint(spec.prior);
  const auto rows = run_sweep(spec, prior, out_dir, workers);
  out << rows.size() << " configuration(s) over " << spec.tasks.size() << " task(s); grid holds "
      << grid_size(spec.grid) << " points\n";
  if (!rows.empty()) {
    out << "best config " << rows.front().config_id << " mean " << spec.metric << " "
        << metrics::format_double(rows.front().mean_score) << "\n";
  }
  return rows;
}

}  // namespace rfg::cli
