#pragma once

#include <algorithm>
#include <cmath>

#include "rfg/numcore/tensor.hpp"

namespace rfg::rl {

enum class ShapingVariant { none, reinvent, acegen };

struct ShapingConfig {
  ShapingVariant variant = ShapingVariant::acegen;
  double sigma = 0.0;
  double alpha = 1.0;
};

/// (prior_ll - agent_ll + sigma * R)^2 / agent_ll
inline double reinvent_reshape(double reward, double prior_ll, double agent_ll, double sigma) {
  if (agent_ll == 0.0) throw Error("reinvent_reshape: agent log-likelihood is zero");
  const double d = prior_ll - agent_ll + sigma * reward;
  return d * d / agent_ll;
}

/// max(0, R + sigma * prior_ll)^alpha
inline double acegen_reshape(double reward, double prior_ll, double sigma, double alpha) {
  return std::pow(std::max(0.0, reward + sigma * prior_ll), alpha);
}

inline double reshape(const ShapingConfig& c, double reward, double prior_ll, double agent_ll) {
  switch (c.variant) {
    case ShapingVariant::reinvent: return reinvent_reshape(reward, prior_ll, agent_ll, c.sigma);
    case ShapingVariant::acegen: return acegen_reshape(reward, prior_ll, c.sigma, c.alpha);
    default: return reward;
  }
}

}  // namespace rfg::rl
