#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfg/numcore.hpp"
#include "rfg/smiles/vocabulary.hpp"

namespace rfg::policy {

using num::Tensor;
using smiles::TokenId;
using smiles::Vocabulary;

struct PolicyConfig {
  int embedding_dim = 64;
  int hidden_dim = 128;
  int num_layers = 1;
  int max_len = 100;     // generated tokens per episode, EOS included
  int output_hidden = 0; // width of an optional hidden layer in the output head

  void validate() const {
    if (embedding_dim < 1 || hidden_dim < 1 || num_layers < 1 || output_hidden < 0) {
      throw Error("policy config: dimensions must be >= 1");
    }
    if (max_len < 2) throw Error("policy config: max_len must be >= 2");
  }
  bool operator==(const PolicyConfig&) const = default;
};

/// Embedding, GRU stack and output head. Tensor order (also the checkpoint
/// order): embedding [V,E]; per layer W_ih [in,3H], W_hh [H,3H], b_ih [3H],
/// b_hh [3H] with gate columns (reset, update, candidate); optional head
/// W [H,M], b [M]; output W [H|M,V], b [V].
struct PolicyParams {
  PolicyConfig config;
  Vocabulary vocab;
  std::vector<Tensor> tensors;

  std::size_t vocab_size() const { return vocab.size(); }

  const Tensor& embedding() const { return tensors[0]; }
  const Tensor& w_ih(int layer) const { return tensors[1 + 4 * layer]; }
  const Tensor& w_hh(int layer) const { return tensors[2 + 4 * layer]; }
  const Tensor& b_ih(int layer) const { return tensors[3 + 4 * layer]; }
  const Tensor& b_hh(int layer) const { return tensors[4 + 4 * layer]; }
  std::size_t head_offset() const { return 1 + 4 * static_cast<std::size_t>(config.num_layers); }
  const Tensor& out_w() const { return tensors[tensors.size() - 2]; }
  const Tensor& out_b() const { return tensors.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }

  /// Deep copy; `trainable` controls requires_grad on the copy.
  PolicyParams clone(bool trainable) const {
    PolicyParams p{config, vocab, {}};
    for (const auto& t : tensors) p.tensors.push_back(t.clone(trainable));
    return p;
  }

  void zero_grad() {
    for (auto& t : tensors) t.zero_grad();
  }
};

/// Tensor shapes in checkpoint order.
inline std::vector<num::Shape> parameter_shapes(const PolicyConfig& c, std::size_t vocab) {
  const auto E = static_cast<std::size_t>(c.embedding_dim);
  const auto H = static_cast<std::size_t>(c.hidden_dim);
  const auto M = static_cast<std::size_t>(c.output_hidden);
  std::vector<num::Shape> shapes{{vocab, E}};
  for (int l = 0; l < c.num_layers; ++l) {
    const std::size_t in = l == 0 ? E : H;
    shapes.push_back({in, 3 * H});
    shapes.push_back({H, 3 * H});
    shapes.push_back({3 * H});
    shapes.push_back({3 * H});
  }
  if (M > 0) {
    shapes.push_back({H, M});
    shapes.push_back({M});
  }
  shapes.push_back({M > 0 ? M : H, vocab});
  shapes.push_back({vocab});
  return shapes;
}

/// Every weight uniform in [-k, k] with k = 1/sqrt(hidden_dim).
inline PolicyParams init_policy(const PolicyConfig& config, const Vocabulary& vocab,
                                std::uint64_t seed) {
  config.validate();
  PolicyParams p{config, vocab, {}};
  Rng rng(seed, 0x1417);
  const double k = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  for (const auto& shape : parameter_shapes(config, vocab.size())) {
    std::vector<double> values(num::numel(shape));
    for (auto& v : values) v = rng.uniform(-k, k);
    p.tensors.emplace_back(shape, std::move(values), true);
  }
  return p;
}

/// Hidden state of every layer for a batch of rows.
using Hidden = std::vector<Tensor>;

inline Hidden zero_hidden(const PolicyParams& p, std::size_t batch) {
  Hidden h;
  for (int l = 0; l < p.config.num_layers; ++l) {
    h.push_back(Tensor::zeros({batch, static_cast<std::size_t>(p.config.hidden_dim)}));
  }
  return h;
}

/// Keeps only the given rows of every layer's state.
inline Hidden select_rows(const Hidden& h, std::span<const std::int32_t> rows) {
  Hidden out;
  for (const auto& layer : h) out.push_back(num::gather_rows(layer, rows));
  return out;
}

/// Logit offset of GO, which is consumed as the first input but never emitted.
inline constexpr double kMaskedLogit = -1e4;

inline Tensor action_mask(std::size_t vocab_size) {
  std::vector<double> v(vocab_size, 0.0);
  v[Vocabulary::kGo] = kMaskedLogit;
  return Tensor::vector(std::move(v));
}

/// Number of actions the policy can take (every token except GO).
inline std::size_t action_count(const PolicyParams& p) { return p.vocab_size() - 1; }

struct StepOutput {
  Tensor log_probs;  // [B,V]
  Hidden hidden;
};

/// One GRU cell on a batch (gate order r, z, n):
///   r = sig(x Wir + bir + h Whr + bhr), z = sig(...),
///   n = tanh(x Win + bin + r * (h Whn + bhn)), h' = n + z * (h - n).
inline Tensor gru_cell(const Tensor& x, const Tensor& h, const Tensor& w_ih, const Tensor& w_hh,
                       const Tensor& b_ih, const Tensor& b_hh, std::size_t H) {
  using namespace num;
  const Tensor gi = add_bias(matmul(x, w_ih), b_ih);
  const Tensor gh = add_bias(matmul(h, w_hh), b_hh);
  const Tensor r = sigmoid(add(slice_cols(gi, 0, H), slice_cols(gh, 0, H)));
  const Tensor z = sigmoid(add(slice_cols(gi, H, 2 * H), slice_cols(gh, H, 2 * H)));
  const Tensor n = tanh(add(slice_cols(gi, 2 * H, 3 * H), mul(r, slice_cols(gh, 2 * H, 3 * H))));
  return add(n, mul(z, sub(h, n)));
}

/// Consumes one input token per row; returns next-token log-probabilities.
inline StepOutput step(const PolicyParams& p, std::span<const TokenId> inputs,
                       const Hidden& hidden) {
  using namespace num;
  const auto H = static_cast<std::size_t>(p.config.hidden_dim);
  Tensor x = gather_rows(p.embedding(), inputs);
  StepOutput out;
  for (int l = 0; l < p.config.num_layers; ++l) {
    x = gru_cell(x, hidden[l], p.w_ih(l), p.w_hh(l), p.b_ih(l), p.b_hh(l), H);
    out.hidden.push_back(x);
  }
  if (p.config.output_hidden > 0) {
    const auto off = p.head_offset();
    x = tanh(add_bias(matmul(x, p.tensors[off]), p.tensors[off + 1]));
  }
  out.log_probs = log_softmax(add_bias(add_bias(matmul(x, p.out_w()), p.out_b()),
                                      action_mask(p.vocab_size())));
  return out;
}

}  // namespace rfg::policy
