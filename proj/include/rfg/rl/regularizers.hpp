#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rfg/numcore.hpp"

namespace rfg::rl {

using num::Tensor;

inline constexpr double kProbFloor = 1e-12;

/// lambda * sum_t sum_a p(a|s_t) * log(p / q), p from the prior, q from the
/// agent (floored at 1e-12). Inputs are per-step log-probability blocks [k,V].
inline Tensor kl_term(const std::vector<Tensor>& prior_log_probs,
                      const std::vector<Tensor>& agent_log_probs, double lambda) {
  if (prior_log_probs.size() != agent_log_probs.size()) {
    throw ShapeError("kl_term: " + std::to_string(prior_log_probs.size()) + " prior steps vs " +
                     std::to_string(agent_log_probs.size()) + " agent steps");
  }
  const double log_floor = std::log(kProbFloor);
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t t = 0; t < agent_log_probs.size(); ++t) {
    const Tensor& lp = prior_log_probs[t];
    const Tensor& lq = agent_log_probs[t];
    if (lp.shape() != lq.shape()) {
      throw ShapeError("kl_term: step " + std::to_string(t) + " shapes " +
                       num::shape_str(lp.shape()) + " vs " + num::shape_str(lq.shape()));
    }
    std::vector<double> p(lp.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(lp[i]);
    const Tensor prior_p(lp.shape(), std::move(p));
    const Tensor diff = num::sub(lp.detach(), num::clamp_min(lq, log_floor));
    total = num::add(total, num::sum(num::mul(prior_p, diff)));
  }
  return num::scale(total, lambda);
}

/// lambda * sum_t H(pi(.|s_t)) with H = -sum p log p.
inline Tensor entropy_term(const std::vector<Tensor>& agent_log_probs, double lambda) {
  Tensor total = Tensor::scalar(0.0);
  for (const auto& lq : agent_log_probs) {
    total = num::add(total, num::sum(num::mul(num::exp(lq), lq)));
  }
  return num::scale(total, -lambda);
}

/// lambda / NLL per episode, NLL = -sum_t log pi(a_t|s_t). Input is the [B]
/// log-likelihood vector; returns the [B] penalties.
inline Tensor all_term(const Tensor& seq_log_likelihood, double lambda) {
  for (double ll : seq_log_likelihood.data()) {
    if (!(-ll > 0.0)) throw Error("all_term: agent NLL must be positive");
  }
  return num::scale(num::reciprocal(num::scale(seq_log_likelihood, -1.0)), lambda);
}

inline double all_term(double agent_nll, double lambda) {
  if (!(agent_nll > 0.0)) throw Error("all_term: agent NLL must be positive");
  return lambda / agent_nll;
}

}  // namespace rfg::rl
