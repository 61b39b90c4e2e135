#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rfg/metrics.hpp"
#include "rfg/policy.hpp"
#include "rfg/tasks.hpp"

namespace rfg::cli {

/// Everything a run can be configured with. Defaults are plain REINFORCE
/// settings (num_envs 128, lr 1e-4, replay on with buffer 100 / batch 10).
struct RunConfig {
  tasks::AgentConfig agent;
  tasks::TaskSpec task;
  policy::PolicyConfig policy;
  policy::PretrainOptions pretrain;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::size_t auc_interval = 100;
  std::size_t sediv_k = 1000;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  return d;
}

inline long long to_int(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789-") != std::string::npos) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  try {
    return std::stoll(v);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& v) {
  if (v == "true" || v == "True" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "False" || v == "0" || v == "no") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <typename T>
void set_count(T& field, const std::string& v, long long min, const char* key) {
  const auto n = to_int(v);
  require(n >= min, std::string(key) + " must be >= " + std::to_string(min));
  field = static_cast<T>(n);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["seed"] = [](RunConfig& c, const std::string& v) { set_count(c.seed, v, 0, "seed"); };
    t["replicates"] = [](RunConfig& c, const std::string& v) {
      set_count(c.replicates, v, 1, "replicates");
    };
    t["task"] = [](RunConfig& c, const std::string& v) {
      const auto& names = tasks::task_names();
      require(std::find(names.begin(), names.end(), v) != names.end(), "unknown task '" + v + "'");
      c.task.name = v;
    };
    t["similarity_target"] = [](RunConfig& c, const std::string& v) {
      require(smiles::is_valid(v), "similarity_target '" + v + "' is not a valid molecule");
      c.task.similarity_target = v;
    };
    t["mpo_targets"] = [](RunConfig& c, const std::string& v) {
      try {
        c.task.mpo_targets = tasks::parse_mpo_targets(v);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    };
    t["num_envs"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.num_envs, v, 1, "num_envs");
    };
    t["total_smiles"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.total_smiles, v, 0, "total_smiles");
    };
    t["lr"] = [](RunConfig& c, const std::string& v) {
      c.agent.lr = to_double(v);
      require(c.agent.lr >= 0, "lr must be >= 0");
    };
    t["lr_annealing"] = [](RunConfig& c, const std::string& v) { c.agent.lr_annealing = to_bool(v); };
    t["experience_replay"] = [](RunConfig& c, const std::string& v) {
      c.agent.experience_replay = to_bool(v);
    };
    t["replay_batch_size"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.replay_batch, v, 1, "replay_batch_size");
    };
    t["replay_buffer_size"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.replay_capacity, v, 1, "replay_buffer_size");
    };
    t["replay_sampler"] = [](RunConfig& c, const std::string& v) {
      require(v == "uniform" || v == "prioritized", "replay_sampler must be uniform or prioritized");
      c.agent.sampler = v == "uniform" ? explore::Sampler::uniform : explore::Sampler::prioritized;
    };
    t["shaping"] = [](RunConfig& c, const std::string& v) {
      require(v == "none" || v == "reinvent" || v == "acegen",
              "shaping must be none, reinvent or acegen");
      c.agent.loss.shaping.variant = v == "none"       ? rl::ShapingVariant::none
                                     : v == "reinvent" ? rl::ShapingVariant::reinvent
                                                       : rl::ShapingVariant::acegen;
    };
    t["sigma"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.shaping.sigma = to_double(v);
      require(c.agent.loss.shaping.sigma >= 0, "sigma must be >= 0");
    };
    t["alpha"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.shaping.alpha = to_double(v);
      require(c.agent.loss.shaping.alpha >= 1, "alpha must be >= 1");
    };
    t["topk"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.topk = to_double(v);
      require(c.agent.loss.topk > 0 && c.agent.loss.topk <= 1, "topk must lie in (0, 1]");
    };
    t["kl_coef"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.kl_coef = to_double(v);
      require(c.agent.loss.kl_coef >= 0, "kl_coef must be >= 0");
    };
    t["entropy_coef"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.entropy_coef = to_double(v);
      require(c.agent.loss.entropy_coef >= 0, "entropy_coef must be >= 0");
    };
    t["likely_penalty"] = [](RunConfig& c, const std::string& v) {
      c.agent.loss.likely_penalty = to_double(v);
      require(c.agent.loss.likely_penalty >= 0, "likely_penalty must be >= 0");
    };
    t["baseline"] = [](RunConfig& c, const std::string& v) {
      if (v == "mab") {
        c.agent.baseline = rl::BaselineKind::mab;
      } else if (v == "loo") {
        c.agent.baseline = rl::BaselineKind::loo;
      } else if (v == "False" || v == "false" || v == "none") {
        c.agent.baseline = rl::BaselineKind::none;
      } else {
        throw ConfigError("baseline must be False, mab or loo");
      }
    };
    t["mab_decay"] = [](RunConfig& c, const std::string& v) {
      c.agent.mab_decay = to_double(v);
      require(c.agent.mab_decay > 0 && c.agent.mab_decay <= 1, "mab_decay must lie in (0, 1]");
    };
    t["rnd_coef"] = [](RunConfig& c, const std::string& v) {
      c.agent.rnd_coef = to_double(v);
      require(c.agent.rnd_coef >= 0, "rnd_coef must be >= 0");
    };
    t["diversity_filter"] = [](RunConfig& c, const std::string& v) {
      require(v == "none" || v == "unique" || v == "similar",
              "diversity_filter must be none, unique or similar");
      c.agent.df = v == "none"     ? explore::DfMode::none
                   : v == "unique" ? explore::DfMode::unique
                                   : explore::DfMode::similar;
    };
    t["df_threshold"] = [](RunConfig& c, const std::string& v) {
      c.agent.df_threshold = to_double(v);
      require(c.agent.df_threshold > 0 && c.agent.df_threshold <= 1,
              "df_threshold must lie in (0, 1]");
    };
    t["df_bin_capacity"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.df_bin_capacity, v, 1, "df_bin_capacity");
    };
    t["threads"] = [](RunConfig& c, const std::string& v) {
      set_count(c.agent.threads, v, 1, "threads");
    };
    t["embedding_dim"] = [](RunConfig& c, const std::string& v) {
      set_count(c.policy.embedding_dim, v, 1, "embedding_dim");
    };
    t["hidden_dim"] = [](RunConfig& c, const std::string& v) {
      set_count(c.policy.hidden_dim, v, 1, "hidden_dim");
    };
    t["num_layers"] = [](RunConfig& c, const std::string& v) {
      set_count(c.policy.num_layers, v, 1, "num_layers");
    };
    t["max_len"] = [](RunConfig& c, const std::string& v) {
      set_count(c.policy.max_len, v, 2, "max_len");
    };
    t["output_hidden"] = [](RunConfig& c, const std::string& v) {
      set_count(c.policy.output_hidden, v, 0, "output_hidden");
    };
    t["epochs"] = [](RunConfig& c, const std::string& v) {
      set_count(c.pretrain.epochs, v, 1, "epochs");
    };
    t["pretrain_lr"] = [](RunConfig& c, const std::string& v) {
      c.pretrain.lr = to_double(v);
      require(c.pretrain.lr >= 0, "pretrain_lr must be >= 0");
    };
    t["batch_size"] = [](RunConfig& c, const std::string& v) {
      set_count(c.pretrain.batch_size, v, 1, "batch_size");
    };
    t["clip_norm"] = [](RunConfig& c, const std::string& v) {
      c.pretrain.clip_norm = to_double(v);
      require(c.pretrain.clip_norm >= 0, "clip_norm must be >= 0");
    };
    t["auc_interval"] = [](RunConfig& c, const std::string& v) {
      set_count(c.auc_interval, v, 1, "auc_interval");
    };
    t["sediv_k"] = [](RunConfig& c, const std::string& v) { set_count(c.sediv_k, v, 1, "sediv_k"); };
    return t;
  }();
  return table;
}

}  // namespace detail

inline bool is_config_key(const std::string& key) { return detail::setters().count(key) != 0; }

/// Applies one `key = value` setting; throws ConfigError on bad keys/values.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const auto it = detail::setters().find(key);
  if (it == detail::setters().end()) throw ConfigError("unknown key '" + key + "'");
  try {
    it->second(c, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

struct KeyValue {
  std::size_t line = 0;
  std::string key, value;
};

/// `key = value` lines; '#' starts a comment line, blank lines are skipped.
inline std::vector<KeyValue> read_key_values(std::istream& is, const std::string& origin) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + " line " + std::to_string(n) + ": expected 'key = value'");
    }
    out.push_back({n, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1))});
    if (out.back().key.empty()) {
      throw ConfigError(origin + " line " + std::to_string(n) + ": missing key");
    }
  }
  return out;
}

inline RunConfig parse_config(std::istream& is, const std::string& origin = "config") {
  RunConfig c;
  for (const auto& kv : read_key_values(is, origin)) {
    try {
      apply_setting(c, kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + " line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

/// RNG_SEED in the environment replaces the configured seed.
inline void apply_env_seed(RunConfig& c) {
  if (const char* s = std::getenv("RNG_SEED"); s && *s) {
    try {
      apply_setting(c, "seed", s);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("RNG_SEED: ") + e.what());
    }
  }
}

inline metrics::MetricOptions metric_options(const RunConfig& c) {
  metrics::MetricOptions o;
  o.auc_interval = c.auc_interval;
  o.sediv_k = c.sediv_k;
  return o;
}

}  // namespace rfg::cli
