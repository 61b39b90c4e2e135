#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rfg/numcore/tensor.hpp"

namespace rfg::num {

/// Gradients of a loss w.r.t. every requires-grad leaf reachable from it.
class Gradients {
 public:
  void set(const Node* leaf, std::vector<double> g) { grads_[leaf] = std::move(g); }

  /// Zero vector when `t` did not influence the loss.
  std::vector<double> of(const Tensor& t) const {
    auto it = grads_.find(&t.node());
    if (it == grads_.end()) return std::vector<double>(t.size(), 0.0);
    return it->second;
  }
  bool contains(const Tensor& t) const { return grads_.count(&t.node()) != 0; }
  std::size_t size() const { return grads_.size(); }

 private:
  std::unordered_map<const Node*, std::vector<double>> grads_;
};

/// Ordered record of the operations between the leaves and a loss, in
/// topological order (inputs before outputs).
class Tape {
 public:
  explicit Tape(const Tensor& root) {
    std::unordered_set<const Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(&root.node(), 0);
    seen.insert(&root.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* parent = node->parents[next++].get();
        if (parent->requires_grad && seen.insert(parent).second) {
          stack.emplace_back(parent, 0);
        }
      } else {
        order_.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::size_t size() const { return order_.size(); }

  /// Replays the tape in reverse, accumulating into leaf grads, then drops
  /// all interior nodes' closures and parent links.
  Gradients replay() {
    Node* root = order_.back();
    for (Node* n : order_) {
      if (!n->is_leaf) n->grad.assign(n->value.size(), 0.0);
    }
    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node* n = *it;
      if (!n->is_leaf && n->backward_fn) n->backward_fn(*n);
    }
    Gradients out;
    for (Node* n : order_) {
      if (n->is_leaf) {
        n->ensure_grad();
        out.set(n, n->grad);
      } else {
        n->grad.clear();
        n->grad.shrink_to_fit();
        n->backward_fn = nullptr;
        n->parents.clear();
      }
    }
    order_.clear();
    return out;
  }

 private:
  std::vector<Node*> order_;
};

/// Reverse-mode differentiation of a scalar loss. Leaf grads accumulate (call
/// Tensor::zero_grad between steps); the returned map holds the leaf totals.
inline Gradients backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return {};
  Tape tape(loss);
  return tape.replay();
}

/// Central-difference check of the analytic gradient of `f` at `params`.
/// Returns max |analytic - numeric| / max(1, |analytic|) over all entries.
inline double finite_difference_check(
    const std::function<Tensor(std::span<Tensor>)>& f, std::span<Tensor> params,
    double h = 1e-5) {
  for (auto& p : params) p.zero_grad();
  const Tensor loss = f(params);
  const Gradients g = backward(loss);
  double worst = 0.0;
  for (auto& p : params) {
    const auto analytic = g.of(p);
    auto data = p.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + h;
      const double up = f(params).item();
      data[i] = orig - h;
      const double down = f(params).item();
      data[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err =
          std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  for (auto& p : params) p.zero_grad();
  return worst;
}

}  // namespace rfg::num
