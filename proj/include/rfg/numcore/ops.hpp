#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rfg/numcore/tensor.hpp"

// Differentiable primitives. Every op computes its value eagerly and, when at
// least one input requires grad, links the result into the tape through
// Node::parents / Node::backward_fn.

namespace rfg::num {

namespace detail {

inline void check(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ShapeError(std::string(op) + ": " + what);
}

inline std::string pair_str(const Tensor& a, const Tensor& b) {
  return shape_str(a.shape()) + " vs " + shape_str(b.shape());
}

inline bool any_grad(std::initializer_list<const Tensor*> inputs) {
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

template <typename Backward>
Tensor record(Shape shape, std::vector<double> value,
              std::initializer_list<const Tensor*> inputs, Backward&& bw) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (any_grad(inputs)) {
    node->requires_grad = true;
    node->is_leaf = false;
    for (const auto* t : inputs) node->parents.push_back(t->node_ptr());
    node->backward_fn = std::forward<Backward>(bw);
  }
  return Tensor::from_node(std::move(node));
}

// Accumulate `g` into parent i if it takes part in differentiation.
inline Node* grad_target(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p;
}

// c[M,N] = a[M,K] * b[K,N]; each row of c is accumulated over k in order, so
// a row's result does not depend on the other rows present.
inline void gemm(std::span<const double> a, std::span<const double> b,
                 std::span<double> c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    std::fill(crow, crow + n, 0.0);
    const double* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename F, typename D>
Tensor unary(const Tensor& x, F f, D dfdx_from_out_and_in) {
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return record(x.shape(), std::move(out), {&x},
                [d = dfdx_from_out_and_in](Node& self) {
                  Node* p = grad_target(self, 0);
                  if (!p) return;
                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                    p->grad[i] += self.grad[i] * d(self.value[i], p->value[i]);
                  }
                });
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::check(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
                "matmul", "incompatible shapes " + detail::pair_str(a, b));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  detail::gemm(a.data(), b.data(), out, m, k, n);
  return detail::record({m, n}, std::move(out), {&a, &b},
                        [m, k, n](Node& self) {
    const auto& g = self.grad;
    if (Node* pa = detail::grad_target(self, 0)) {
      const auto& bv = self.parents[1]->value;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = g.data() + i * n;
          const double* brow = bv.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          pa->grad[i * k + p] += acc;
        }
      }
    }
    if (Node* pb = detail::grad_target(self, 1)) {
      const auto& av = self.parents[0]->value;
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aval = av[i * k + p];
          double* brow = pb->grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) brow[j] += aval * grow[j];
        }
      }
    }
  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check(a.shape() == b.shape(), "add",
                "shape mismatch " + detail::pair_str(a, b));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return detail::record(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    for (std::size_t s = 0; s < 2; ++s) {
      if (Node* p = detail::grad_target(self, s)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          p->grad[i] += self.grad[i];
        }
      }
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check(a.shape() == b.shape(), "sub",
                "shape mismatch " + detail::pair_str(a, b));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return detail::record(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    if (Node* p = detail::grad_target(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
    if (Node* p = detail::grad_target(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] -= self.grad[i];
    }
  });
}

/// Elementwise product.
inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check(a.shape() == b.shape(), "mul",
                "shape mismatch " + detail::pair_str(a, b));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return detail::record(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    if (Node* p = detail::grad_target(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * bv[i];
    }
    if (Node* p = detail::grad_target(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * av[i];
    }
  });
}

/// Adds a length-N vector to every row of an [M,N] matrix.
inline Tensor add_bias(const Tensor& x, const Tensor& bias) {
  detail::check(x.rank() == 2 && bias.rank() == 1 && bias.size() == x.cols(),
                "add_bias", "shape mismatch " + detail::pair_str(x, bias));
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + bias[j];
  }
  return detail::record(x.shape(), std::move(out), {&x, &bias},
                        [m, n](Node& self) {
    if (Node* p = detail::grad_target(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
    if (Node* p = detail::grad_target(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) p->grad[j] += self.grad[i * n + j];
      }
    }
  });
}

inline Tensor scale(const Tensor& x, double c) {
  return detail::unary(
      x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

inline Tensor one_minus(const Tensor& x) {
  return detail::unary(
      x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

inline Tensor sigmoid(const Tensor& x) {
  return detail::unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double y, double) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& x) {
  return detail::unary(
      x, [](double v) { return std::tanh(v); },
      [](double y, double) { return 1.0 - y * y; });
}

inline Tensor relu(const Tensor& x) {
  return detail::unary(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double, double in) { return in > 0 ? 1.0 : 0.0; });
}

inline Tensor exp(const Tensor& x) {
  return detail::unary(
      x, [](double v) { return std::exp(v); },
      [](double y, double) { return y; });
}

inline Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    detail::check(v > 0, "log", "non-positive input " + std::to_string(v));
  }
  return detail::unary(
      x, [](double v) { return std::log(v); },
      [](double, double in) { return 1.0 / in; });
}

inline Tensor reciprocal(const Tensor& x) {
  for (double v : x.data()) {
    detail::check(v != 0, "reciprocal", "zero input");
  }
  return detail::unary(
      x, [](double v) { return 1.0 / v; },
      [](double y, double) { return -y * y; });
}

inline Tensor square(const Tensor& x) {
  return detail::unary(
      x, [](double v) { return v * v; },
      [](double, double in) { return 2.0 * in; });
}

/// max(x, lo) elementwise; gradient is zero where the floor is active.
inline Tensor clamp_min(const Tensor& x, double lo) {
  return detail::unary(
      x, [lo](double v) { return v < lo ? lo : v; },
      [lo](double, double in) { return in < lo ? 0.0 : 1.0; });
}

/// Row-wise log-softmax of an [M,N] matrix.
inline Tensor log_softmax(const Tensor& x) {
  detail::check(x.rank() == 2, "log_softmax",
                "expected a matrix, got " + shape_str(x.shape()));
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = in.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] - lse;
  }
  return detail::record(x.shape(), std::move(out), {&x}, [m, n](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < m; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += self.grad[i * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = i * n + j;
        p->grad[k] += self.grad[k] - std::exp(self.value[k]) * gs;
      }
    }
  });
}

/// Rows of `table` selected by `ids` (embedding lookup).
inline Tensor gather_rows(const Tensor& table, std::span<const std::int32_t> ids) {
  detail::check(table.rank() == 2, "gather_rows",
                "expected a matrix, got " + shape_str(table.shape()));
  const std::size_t n = table.cols();
  std::vector<double> out(ids.size() * n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    detail::check(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < table.rows(),
                  "gather_rows", "row id " + std::to_string(ids[i]) +
                                     " out of range for " + shape_str(table.shape()));
    std::copy_n(table.data().begin() + ids[i] * n, n, out.begin() + i * n);
  }
  std::vector<std::int32_t> idx(ids.begin(), ids.end());
  return detail::record({ids.size(), n}, std::move(out), {&table},
                        [idx = std::move(idx), n](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        p->grad[idx[i] * n + j] += self.grad[i * n + j];
      }
    }
  });
}

/// out[i] = x[i, cols[i]] for an [M,N] matrix; result has shape [M].
inline Tensor pick(const Tensor& x, std::span<const std::int32_t> cols) {
  detail::check(x.rank() == 2 && cols.size() == x.rows(), "pick",
                "need one column per row of " + shape_str(x.shape()));
  const std::size_t n = x.cols();
  std::vector<double> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    detail::check(cols[i] >= 0 && static_cast<std::size_t>(cols[i]) < n, "pick",
                  "column " + std::to_string(cols[i]) + " out of range");
    out[i] = x[i * n + cols[i]];
  }
  std::vector<std::int32_t> idx(cols.begin(), cols.end());
  return detail::record({cols.size()}, std::move(out), {&x},
                        [idx = std::move(idx), n](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < idx.size(); ++i) p->grad[i * n + idx[i]] += self.grad[i];
  });
}

/// Columns [begin, end) of an [M,N] matrix.
inline Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  detail::check(x.rank() == 2 && begin < end && end <= x.cols(), "slice_cols",
                "bad range [" + std::to_string(begin) + "," + std::to_string(end) +
                    ") of " + shape_str(x.shape()));
  const std::size_t m = x.rows(), n = x.cols(), w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(x.data().begin() + i * n + begin, w, out.begin() + i * w);
  }
  return detail::record({m, w}, std::move(out), {&x},
                        [m, n, w, begin](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) p->grad[i * n + begin + j] += self.grad[i * w + j];
    }
  });
}

/// Row sums of an [M,N] matrix, shape [M].
inline Tensor row_sum(const Tensor& x) {
  detail::check(x.rank() == 2, "row_sum",
                "expected a matrix, got " + shape_str(x.shape()));
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += x[i * n + j];
  }
  return detail::record({m}, std::move(out), {&x}, [m, n](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) p->grad[i * n + j] += self.grad[i];
    }
  });
}

inline Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return detail::record({}, {s}, {&x}, [](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (double& g : p->grad) g += self.grad[0];
  });
}

inline Tensor mean(const Tensor& x) {
  detail::check(x.size() > 0, "mean", "empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

/// Elements of a vector at `idx` (repeats allowed).
inline Tensor take(const Tensor& x, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    detail::check(idx[i] < x.size(), "take", "index out of range");
    out[i] = x[idx[i]];
  }
  std::vector<std::size_t> index(idx.begin(), idx.end());
  return detail::record({idx.size()}, std::move(out), {&x},
                        [index = std::move(index)](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < index.size(); ++i) p->grad[index[i]] += self.grad[i];
  });
}

/// Vector of length n holding x in its first x.size() slots and zeros after.
inline Tensor pad_tail(const Tensor& x, std::size_t n) {
  detail::check(x.size() <= n, "pad_tail",
                shape_str(x.shape()) + " longer than " + std::to_string(n));
  std::vector<double> out(n, 0.0);
  std::copy(x.data().begin(), x.data().end(), out.begin());
  return detail::record({n}, std::move(out), {&x}, [](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += self.grad[i];
  });
}

/// First k rows of a matrix.
inline Tensor head_rows(const Tensor& x, std::size_t k) {
  detail::check(x.rank() == 2 && k <= x.rows(), "head_rows",
                "cannot take " + std::to_string(k) + " rows of " + shape_str(x.shape()));
  const std::size_t n = x.cols();
  std::vector<double> out(x.data().begin(), x.data().begin() + k * n);
  return detail::record({k, n}, std::move(out), {&x}, [](Node& self) {
    Node* p = detail::grad_target(self, 0);
    if (!p) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
  });
}

/// Stacks equal-length vectors (or [1,N] rows) into an [M,N] matrix.
inline Tensor stack_rows(std::span<const Tensor> parts) {
  detail::check(!parts.empty(), "stack_rows", "no inputs");
  const std::size_t n = parts.front().size();
  std::vector<double> out;
  out.reserve(parts.size() * n);
  bool grad = false;
  for (const auto& t : parts) {
    detail::check(t.size() == n, "stack_rows", "ragged rows");
    out.insert(out.end(), t.data().begin(), t.data().end());
    grad = grad || t.requires_grad();
  }
  auto node = std::make_shared<Node>();
  node->shape = {parts.size(), n};
  node->value = std::move(out);
  if (grad) {
    node->requires_grad = true;
    node->is_leaf = false;
    for (const auto& t : parts) node->parents.push_back(t.node_ptr());
    node->backward_fn = [n](Node& self) {
      for (std::size_t r = 0; r < self.parents.size(); ++r) {
        Node* p = detail::grad_target(self, r);
        if (!p) continue;
        for (std::size_t j = 0; j < n; ++j) p->grad[j] += self.grad[r * n + j];
      }
    };
  }
  return Tensor::from_node(std::move(node));
}

}  // namespace rfg::num
