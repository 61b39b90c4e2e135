#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rfg/numcore.hpp"
#include "rfg/smiles/fingerprint.hpp"

namespace rfg::explore {

using num::Tensor;

struct RndConfig {
  double coef = 0.0;
  std::size_t input_bits = 1024;
  std::size_t hidden = 64;
  std::size_t output = 32;
  double lr = 1e-3;
};

/// Two-layer perceptron: tanh(x W1 + b1) W2 + b2.
struct Mlp {
  std::vector<Tensor> params;

  static Mlp init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng, bool trainable) {
    Mlp m;
    auto layer = [&](std::size_t fan_in, std::size_t fan_out) {
      const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::vector<double> w(fan_in * fan_out), b(fan_out);
      for (auto& v : w) v = rng.uniform(-k, k);
      for (auto& v : b) v = rng.uniform(-k, k);
      m.params.emplace_back(num::Shape{fan_in, fan_out}, std::move(w), trainable);
      m.params.emplace_back(num::Shape{fan_out}, std::move(b), trainable);
    };
    layer(in, hidden);
    layer(hidden, out);
    return m;
  }

  Tensor forward(const Tensor& x) const {
    using namespace num;
    const Tensor h = tanh(add_bias(matmul(x, params[0]), params[1]));
    return add_bias(matmul(h, params[2]), params[3]);
  }
};

inline Tensor fingerprint_matrix(const std::vector<smiles::Fingerprint>& fps, std::size_t bits) {
  std::vector<double> x(fps.size() * bits, 0.0);
  for (std::size_t i = 0; i < fps.size(); ++i) {
    if (fps[i].width() != bits) throw ShapeError("rnd: fingerprint width mismatch");
    for (std::size_t j = 0; j < bits; ++j) x[i * bits + j] = fps[i].test(j) ? 1.0 : 0.0;
  }
  return Tensor({fps.size(), bits}, std::move(x));
}

/// Random network distillation: a trainable predictor chasing a frozen
/// random target; the squared error is the novelty signal.
class RndState {
 public:
  RndState(const RndConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    Rng t(seed, 0x7a11), p(seed, 0x9e3d);
    target_ = Mlp::init(cfg.input_bits, cfg.hidden, cfg.output, t, false);
    predictor_ = Mlp::init(cfg.input_bits, cfg.hidden, cfg.output, p, true);
    adam_.lr = cfg.lr;
  }

  const RndConfig& config() const { return cfg_; }
  const Mlp& target() const { return target_; }
  const Mlp& predictor() const { return predictor_; }

  /// ||f_hat(x) - f(x)||^2 per molecule.
  std::vector<double> raw_errors(const std::vector<smiles::Fingerprint>& fps) const {
    if (fps.empty()) return {};
    const Tensor x = fingerprint_matrix(fps, cfg_.input_bits);
    const Tensor f = target_.forward(x);
    Mlp frozen{{}};
    for (const auto& t : predictor_.params) frozen.params.push_back(t.detach());
    const Tensor g = frozen.forward(x);
    std::vector<double> out(fps.size(), 0.0);
    for (std::size_t i = 0; i < fps.size(); ++i) {
      for (std::size_t j = 0; j < cfg_.output; ++j) {
        const double d = g[i * cfg_.output + j] - f[i * cfg_.output + j];
        out[i] += d * d;
      }
    }
    return out;
  }

  /// coef * error / running_std, clamped to [0, 1]. Updates the running
  /// statistics with this batch first.
  std::vector<double> bonuses(const std::vector<smiles::Fingerprint>& fps) {
    if (cfg_.coef == 0.0) return std::vector<double>(fps.size(), 0.0);
    auto err = raw_errors(fps);
    for (double e : err) {
      ++count_;
      const double d = e - mean_;
      mean_ += d / static_cast<double>(count_);
      m2_ += d * (e - mean_);
    }
    const double sd = running_std();
    for (auto& e : err) e = std::clamp(cfg_.coef * e / sd, 0.0, 1.0);
    return err;
  }

  double running_std() const {
    if (count_ < 2) return 1.0;
    const double sd = std::sqrt(m2_ / static_cast<double>(count_ - 1));
    return sd > 0.0 ? sd : 1.0;
  }

  /// One Adam step on the mean squared error toward the target.
  double train(const std::vector<smiles::Fingerprint>& fps) {
    if (fps.empty()) return 0.0;
    const Tensor x = fingerprint_matrix(fps, cfg_.input_bits);
    const Tensor f = target_.forward(x);
    for (auto& t : predictor_.params) t.zero_grad();
    const Tensor loss = num::mean(num::square(num::sub(predictor_.forward(x), f)));
    const auto g = num::backward(loss);
    std::vector<std::vector<double>> grads;
    for (const auto& t : predictor_.params) grads.push_back(g.of(t));
    num::adam_step(predictor_.params, grads, adam_);
    return loss.item();
  }

 private:
  RndConfig cfg_;
  Mlp target_, predictor_;
  num::AdamState adam_;
  std::size_t count_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

}  // namespace rfg::explore
