#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rfg/cli/config.hpp"

namespace rfg::cli {

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

using Grid = std::vector<GridAxis>;

/// Default hyperparameter search space (values in config-file spelling).
inline Grid default_grid() {
  return {
      {"num_envs", {"32", "64", "128", "256"}},
      {"lr", {"0.0001", "0.0005"}},
      {"lr_annealing", {"False", "True"}},
      {"experience_replay", {"False", "True"}},
      {"replay_batch_size", {"10", "20", "50"}},
      {"replay_buffer_size", {"100", "500"}},
      {"replay_sampler", {"uniform", "prioritized"}},
      {"sigma", {"0", "0.001", "0.005", "0.01"}},
      {"kl_coef", {"0", "0.005", "0.01", "0.05"}},
      {"alpha", {"1", "2", "3", "4", "5"}},
      {"topk", {"0.25", "0.5", "0.75", "1.0"}},
      {"baseline", {"False", "mab", "loo"}},
      {"entropy_coef", {"0", "0.001", "0.01"}},
      {"likely_penalty", {"0", "10", "50"}},
      {"rnd_coef", {"0", "0.5", "1.0"}},
  };
}

/// Number of distinct grid points, saturating at 2^64-1.
inline std::uint64_t grid_size(const Grid& g) {
  std::uint64_t n = 1;
  for (const auto& a : g) {
    const std::uint64_t k = a.values.size();
    if (k != 0 && n > UINT64_MAX / k) return UINT64_MAX;
    n *= k;
  }
  return n;
}

/// Mixed-radix decode; the first axis varies slowest.
inline std::vector<std::size_t> grid_point(const Grid& g, std::uint64_t index) {
  std::vector<std::size_t> pick(g.size());
  for (std::size_t i = g.size(); i-- > 0;) {
    const std::uint64_t k = g[i].values.size();
    pick[i] = static_cast<std::size_t>(index % k);
    index /= k;
  }
  return pick;
}

struct SweepSpec {
  std::size_t num_samples = 1;
  std::vector<std::string> tasks{"aromatic_frac"};
  std::uint64_t seed = 0;
  std::string prior;
  std::string metric = "top10_auc";
  Grid grid = default_grid();
  std::vector<KeyValue> base;  // fixed settings applied before the grid point
};

/// Seeded uniform draws of grid indices, without replacement when the grid
/// holds at least `n` points.
inline std::vector<std::uint64_t> sample_grid_indices(const Grid& g, std::size_t n,
                                                      std::uint64_t seed) {
  const std::uint64_t size = grid_size(g);
  Rng rng(seed, 0x5ee9);
  std::vector<std::uint64_t> out;
  out.reserve(n);
  if (size < n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng.below(size));
    return out;
  }
  if (size <= 4 * static_cast<std::uint64_t>(n)) {
    std::vector<std::uint64_t> all(static_cast<std::size_t>(size));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::set<std::uint64_t> seen;
  while (out.size() < n) {
    const auto x = rng.below(size);
    if (seen.insert(x).second) out.push_back(x);
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    auto item = detail::trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Keys: num_samples, tasks, seed, prior, metric, grid.<key> = v1, v2, ...
/// and any run-config key, which pins that key and drops its grid axis.
inline SweepSpec parse_sweep_spec(std::istream& is, const std::string& origin = "sweep spec",
                                  const std::filesystem::path& base_dir = {}) {
  SweepSpec spec;
  for (const auto& kv : read_key_values(is, origin)) {
    const auto where = origin + " line " + std::to_string(kv.line) + ": ";
    try {
      if (kv.key == "num_samples") {
        detail::set_count(spec.num_samples, kv.value, 1, "num_samples");
      } else if (kv.key == "seed") {
        detail::set_count(spec.seed, kv.value, 0, "seed");
      } else if (kv.key == "tasks") {
        spec.tasks = split_list(kv.value);
        detail::require(!spec.tasks.empty(), "tasks: empty list");
        for (const auto& t : spec.tasks) {
          const auto& names = tasks::task_names();
          detail::require(std::find(names.begin(), names.end(), t) != names.end(),
                          "unknown task '" + t + "'");
        }
      } else if (kv.key == "prior") {
        std::filesystem::path p(kv.value);
        spec.prior = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
      } else if (kv.key == "metric") {
        const auto fields = metrics::MetricReport{}.fields();
        detail::require(std::any_of(fields.begin(), fields.end(),
                                    [&](const auto& f) { return f.first == kv.value; }),
                        "unknown metric '" + kv.value + "'");
        spec.metric = kv.value;
      } else if (kv.key.rfind("grid.", 0) == 0) {
        const auto key = kv.key.substr(5);
        detail::require(is_config_key(key), "unknown key '" + key + "'");
        auto values = split_list(kv.value);
        detail::require(!values.empty(), kv.key + ": empty value list");
        RunConfig probe;
        for (const auto& v : values) apply_setting(probe, key, v);
        std::erase_if(spec.base, [&](const KeyValue& b) { return b.key == key; });
        auto it = std::find_if(spec.grid.begin(), spec.grid.end(),
                               [&](const GridAxis& a) { return a.key == key; });
        if (it == spec.grid.end()) {
          spec.grid.push_back({key, std::move(values)});
        } else {
          it->values = std::move(values);
        }
      } else {
        RunConfig probe;
        apply_setting(probe, kv.key, kv.value);
        std::erase_if(spec.grid, [&](const GridAxis& a) { return a.key == kv.key; });
        spec.base.push_back(kv);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  detail::require(!spec.prior.empty(), origin + ": missing 'prior'");
  return spec;
}

inline RunConfig sweep_config(const SweepSpec& spec, std::uint64_t grid_index) {
  RunConfig c;
  for (const auto& kv : spec.base) apply_setting(c, kv.key, kv.value);
  const auto pick = grid_point(spec.grid, grid_index);
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    apply_setting(c, spec.grid[i].key, spec.grid[i].values[pick[i]]);
  }
  return c;
}

}  // namespace rfg::cli
