#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rfg/numcore.hpp"

namespace rfg::num {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng,
                     bool grad = true) {
  std::normal_distribution<double> d(0.0, 0.7);
  std::vector<double> v(r * c);
  for (auto& x : v) x = d(rng);
  return Tensor::matrix(r, c, std::move(v), grad);
}

TEST(Forward, MatmulIdentity) {
  const auto a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  const auto eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const auto c = matmul(a, eye);
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
            (std::vector<double>{1, 2, 3, 4}));
}

TEST(Forward, LogSoftmaxSymmetric) {
  const auto y = log_softmax(Tensor::matrix(1, 2, {0, 0}));
  EXPECT_DOUBLE_EQ(y[0], -std::log(2.0));
  EXPECT_DOUBLE_EQ(y[1], -std::log(2.0));
}

TEST(Forward, SigmoidZero) {
  EXPECT_DOUBLE_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
}

TEST(Forward, ShapeMismatchNamesOpAndShapes) {
  const auto a = Tensor::matrix(2, 3, std::vector<double>(6, 1.0));
  const auto b = Tensor::matrix(2, 3, std::vector<double>(6, 1.0));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos);
    EXPECT_NE(msg.find("[2,3] vs [2,3]"), std::string::npos);
  }
  EXPECT_THROW(add(a, Tensor::vector({1, 2})), ShapeError);
}

TEST(Forward, NoTapeWithoutGrad) {
  const auto a = Tensor::matrix(1, 2, {1, 2});
  const auto y = tanh(a);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node().parents.empty());
}

TEST(Backward, SumOfSquares) {
  auto w = Tensor::vector({1, 2}, true);
  const auto g = backward(sum(mul(w, w)));
  EXPECT_EQ(g.of(w), (std::vector<double>{2, 4}));
}

TEST(Backward, ConstantLossGivesZeroGrad) {
  auto w = Tensor::vector({1, 2}, true);
  const auto c = Tensor::vector({3, 4});
  const auto g = backward(sum(c));
  EXPECT_EQ(g.of(w), (std::vector<double>{0, 0}));
}

TEST(Backward, NonScalarLossThrows) {
  auto w = Tensor::vector({1, 2}, true);
  EXPECT_THROW(backward(mul(w, w)), ShapeError);
}

TEST(Backward, TapeClearedAfterReplay) {
  auto w = Tensor::vector({1, 2}, true);
  const auto y = mul(w, w);
  const auto loss = sum(y);
  backward(loss);
  EXPECT_TRUE(loss.node().parents.empty());
  EXPECT_TRUE(y.node().parents.empty());
}

// Three layers touching every primitive, checked against central differences.
TEST(Backward, RandomCompositionMatchesFiniteDifferences) {
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<Tensor> params = {random_matrix(3, 4, rng), random_matrix(4, 5, rng),
                                  Tensor::vector({0.1, -0.2, 0.3, 0.05, -0.1}, true),
                                  random_matrix(5, 3, rng), random_matrix(6, 4, rng)};
    const auto x = random_matrix(3, 3, rng, false);
    const std::vector<std::int32_t> ids = {2, 0, 5};
    const std::vector<std::int32_t> targets = {1, 2, 0};
    auto f = [&](std::span<Tensor> p) {
      auto h = tanh(add(matmul(x, p[0]), gather_rows(p[4], ids)));
      auto z = sigmoid(add_bias(matmul(h, p[1]), p[2]));
      auto gate = mul(one_minus(z), slice_cols(z, 0, 5));
      auto logits = matmul(gate, p[3]);
      auto lp = log_softmax(logits);
      auto ent = row_sum(mul(exp(lp), lp));
      auto nll = scale(pick(lp, targets), -1.0);
      auto inv = reciprocal(add(nll, Tensor::vector({1, 1, 1})));
      auto sq = square(sub(ent, inv));
      return add(mean(sq), sum(log(add(exp(scale(nll, 0.1)), Tensor::vector({1, 1, 1})))));
    };
    const double err = finite_difference_check(f, params, 1e-5);
    EXPECT_LT(err, 1e-6) << "seed " << seed;
  }
}

TEST(Backward, Deterministic) {
  std::mt19937_64 rng(7);
  auto w = random_matrix(4, 4, rng);
  const auto x = random_matrix(3, 4, rng, false);
  auto run = [&] {
    w.zero_grad();
    return backward(sum(tanh(matmul(x, w)))).of(w);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a, b);
}

TEST(Adam, FirstStepMovesByLr) {
  std::vector<Tensor> p = {Tensor::vector({0.5}, true)};
  AdamState st;
  st.lr = 1e-3;
  std::vector<std::vector<double>> g = {{1.0}};
  adam_step(p, g, st);
  EXPECT_NEAR(p[0][0], 0.5 - 1e-3, 1e-10);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ZeroGradLeavesParams) {
  std::vector<Tensor> p = {Tensor::vector({0.5, -1.0}, true)};
  AdamState st;
  std::vector<std::vector<double>> g = {{0.0, 0.0}};
  adam_step(p, g, st);
  adam_step(p, g, st);
  EXPECT_EQ(p[0][0], 0.5);
  EXPECT_EQ(p[0][1], -1.0);
}

TEST(Adam, ZeroLrIsIdentity) {
  std::vector<Tensor> p = {Tensor::vector({0.5, -1.0}, true)};
  AdamState st;
  st.lr = 0.0;
  std::vector<std::vector<double>> g = {{3.0, -2.0}};
  adam_step(p, g, st);
  EXPECT_EQ(p[0][0], 0.5);
  EXPECT_EQ(p[0][1], -1.0);
}

// Recompute the recurrences by hand for two steps with a constant gradient.
TEST(Adam, TwoStepsMatchRecurrence) {
  std::vector<Tensor> p = {Tensor::vector({1.0, 1.0}, true)};
  AdamState st;
  st.lr = 0.01;
  std::vector<std::vector<double>> g = {{0.5, -2.0}};
  adam_step(p, g, st);
  const double after1 = p[0][0];
  adam_step(p, g, st);
  double w = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * 0.5;
    v = 0.999 * v + 0.001 * 0.25;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(p[0][0], w, 1e-15);
  EXPECT_LT(p[0][0], after1);
  EXPECT_LT(after1, 1.0);
  EXPECT_GT(p[0][1], 1.0);
}

TEST(Adam, ShapeMismatch) {
  std::vector<Tensor> p = {Tensor::vector({1.0, 1.0}, true)};
  AdamState st;
  std::vector<std::vector<double>> g = {{0.5}};
  EXPECT_THROW(adam_step(p, g, st), ShapeError);
}

TEST(GradCheck, QuadraticAndConstant) {
  std::vector<Tensor> p = {Tensor::vector({0.3, -1.2, 2.0}, true)};
  auto quad = [](std::span<Tensor> q) { return sum(mul(q[0], q[0])); };
  EXPECT_LT(finite_difference_check(quad, p, 1e-5), 1e-9);
  auto constant = [](std::span<Tensor>) { return Tensor::scalar(4.0); };
  EXPECT_EQ(finite_difference_check(constant, p, 1e-5), 0.0);
}

}  // namespace
}  // namespace rfg::num
