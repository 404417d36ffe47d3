/*
 * Copyright 2026 The walnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "walnet/ad/adam.hpp"
#include "walnet/ad/gradcheck.hpp"
#include "walnet/ad/ops.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::ad {
namespace {

using D = Tensor<double>;

D random_tensor(Shape shape, Rng& rng, bool requires_grad = true, double scale = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = scale * normal(rng);
  return D::from(std::move(shape), std::move(v), requires_grad);
}

// Keeps values at least margin away from zero so relu kinks are not straddled.
D away_from_zero(Shape shape, Rng& rng, double margin = 0.05) {
  auto t = random_tensor(std::move(shape), rng);
  for (auto& x : t.mutable_values()) x = x >= 0 ? x + margin : x - margin;
  return t;
}

// Random fixed weights make the scalar loss sensitive to every output element.
D weighted_sum(const D& y, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5eed));
  return sum(mul(y, random_tensor(y.shape(), rng, false)));
}

constexpr double kOpTolerance = 1e-4;
constexpr double kEps = 1e-6;

TEST(Tensor, BackwardOfSumIsOnes) {
  auto x = D::full({2, 3}, 0.7, true);
  backward(sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Tensor, BackwardOfSquares) {
  auto x = D::from({3}, {1.0, 2.0, 3.0}, true);
  backward(sum(mul(x, x)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
            (std::vector<double>{2.0, 4.0, 6.0}));
}

TEST(Tensor, RepeatedBackwardAccumulates) {
  auto x = D::from({2}, {1.0, -1.0}, true);
  backward(sum(mul(x, x)));
  backward(sum(mul(x, x)));
  EXPECT_EQ(x.grad()[0], 4.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Tensor, NonScalarRootThrows) {
  auto x = D::full({2}, 1.0, true);
  EXPECT_THROW(backward(mul(x, x)), ShapeError);
}

TEST(Tensor, NoGradGuardRecordsNothing) {
  auto x = D::full({2}, 1.0, true);
  NoGradGuard guard;
  EXPECT_FALSE(sum(x).requires_grad());
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  Rng rng(1);
  auto x = random_tensor({1, 5, 4}, rng, false);
  auto w = D::zeros({1, 1, 3, 3});
  w.mutable_values()[4] = 1.0;
  auto y = conv2d(x, w, D(), 1, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 5, 4}));
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv2d, OnesKernelCountsNeighbours) {
  auto y = conv2d(D::full({1, 3, 3}, 1.0), D::full({1, 1, 3, 3}, 1.0), D(), 1, 1);
  EXPECT_EQ(std::vector<double>(y.values().begin(), y.values().end()),
            (std::vector<double>{4, 6, 4, 6, 9, 6, 4, 6, 4}));
}

TEST(Conv2d, SamePaddingKeepsSpatialSize) {
  auto y = conv2d(Tensor<float>::zeros({1, 128, 128}), Tensor<float>::zeros({16, 1, 3, 3}),
                  Tensor<float>(), 1, 1);
  EXPECT_EQ(y.shape(), (Shape{16, 128, 128}));
}

TEST(Conv2d, ShapeErrorsNameTheDimension) {
  try {
    conv2d(D::zeros({1, 2, 5, 5}), D::zeros({3, 4, 3, 3}), D(), 1, 1);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channels"), std::string::npos);
  }
  try {
    conv2d(D::zeros({1, 1, 1, 5}), D::zeros({3, 1, 3, 3}), D(), 1, 0);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
}

TEST(Conv2d, Linearity) {
  Rng rng(2);
  auto w = random_tensor({3, 2, 3, 3}, rng, false);
  auto x = random_tensor({2, 2, 6, 5}, rng, false);
  auto y = random_tensor({2, 2, 6, 5}, rng, false);
  const double a = 1.7, b = -0.6;
  std::vector<double> mix(x.numel());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x.values()[i] + b * y.values()[i];
  auto lhs = conv2d(D::from(x.shape(), mix), w, D(), 1, 1);
  auto cx = conv2d(x, w, D(), 1, 1);
  auto cy = conv2d(y, w, D(), 1, 1);
  for (std::size_t i = 0; i < lhs.numel(); ++i) {
    EXPECT_NEAR(lhs.values()[i], a * cx.values()[i] + b * cy.values()[i], 1e-10);
  }
}

TEST(BatchNorm, ConstantInputNormalizesToZero) {
  auto state = BatchNormState<double>::create(2);
  auto y = batchnorm2d(D::full({3, 2, 4, 4}, 5.0), state, Mode::kTrain);
  for (double v : y.values()) EXPECT_LE(std::abs(v), 1e-3);
}

TEST(BatchNorm, ZeroGammaGivesBeta) {
  Rng rng(3);
  auto state = BatchNormState<double>::create(2);
  state.gamma.mutable_values()[0] = 0.0;
  state.gamma.mutable_values()[1] = 0.0;
  state.beta.mutable_values()[0] = 0.25;
  state.beta.mutable_values()[1] = -1.5;
  auto y = batchnorm2d(random_tensor({2, 2, 3, 3}, rng, false), state, Mode::kTrain);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const std::size_t c = (i / 9) % 2;
    EXPECT_EQ(y.values()[i], c == 0 ? 0.25 : -1.5);
  }
}

TEST(BatchNorm, TrainOutputIsStandardized) {
  Rng rng(4);
  auto state = BatchNormState<double>::create(3);
  auto x = random_tensor({4, 3, 5, 6}, rng, false, 3.0);
  for (auto& v : x.mutable_values()) v += 2.0;
  auto y = batchnorm2d(x, state, Mode::kTrain);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0.0, s2 = 0.0, n = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t i = 0; i < 30; ++i) {
        const double v = y.values()[(b * 3 + c) * 30 + i];
        s += v;
        s2 += v * v;
        n += 1.0;
      }
    }
    EXPECT_NEAR(s / n, 0.0, 1e-4);
    EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0, 1e-4);
  }
}

TEST(BatchNorm, RunningStatsAndEvalMode) {
  Rng rng(5);
  auto state = BatchNormState<double>::create(2);
  EXPECT_THROW(batchnorm2d(D::zeros({1, 2, 2, 2}), state, Mode::kEval), Error);
  auto x = random_tensor({3, 2, 4, 4}, rng, false);
  batchnorm2d(x, state, Mode::kTrain);
  EXPECT_EQ(state.updates, 1u);
  for (double v : state.running_var) EXPECT_GE(v, 0.0);
  EXPECT_NO_THROW(batchnorm2d(x, state, Mode::kEval));
  EXPECT_THROW(batchnorm2d(D::zeros({1, 3, 2, 2}), state, Mode::kTrain), ShapeError);
}

TEST(MaxPool, Examples) {
  auto y = maxpool2d(D::from({1, 1, 2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(y.values()[0], 4.0);
  EXPECT_EQ(maxpool2d(D::zeros({1, 1, 27, 4})).dim(2), 13u);
  EXPECT_THROW(maxpool2d(D::zeros({1, 1, 1, 4})), ShapeError);
}

TEST(MaxPool, TiesRouteToFirstAndPreserveMass) {
  auto x = D::full({1, 1, 4, 4}, 2.0, true);
  auto y = maxpool2d(x);
  for (double v : y.values()) EXPECT_EQ(v, 2.0);
  Rng rng(6);
  auto w = random_tensor({1, 1, 2, 2}, rng, false);
  backward(sum(mul(y, w)));
  const auto g = x.grad();
  for (std::size_t wy = 0; wy < 2; ++wy) {
    for (std::size_t wx = 0; wx < 2; ++wx) {
      const std::size_t first = (2 * wy) * 4 + 2 * wx;
      EXPECT_EQ(g[first], w.values()[wy * 2 + wx]);
      EXPECT_EQ(g[first + 1] + g[first + 4] + g[first + 5], 0.0);
    }
  }
}

TEST(MaxPool, GradientMassPerWindow) {
  Rng rng(7);
  auto x = random_tensor({2, 3, 6, 8}, rng);
  auto y = maxpool2d(x);
  auto w = random_tensor(y.shape(), rng, false);
  backward(sum(mul(y, w)));
  double in = 0.0, out = 0.0;
  for (double v : x.grad()) in += v;
  for (double v : w.values()) out += v;
  EXPECT_NEAR(in, out, 1e-12);
}

TEST(Activation, Values) {
  auto r = relu(D::from({2}, {-3.0, 3.0}));
  EXPECT_EQ(r.values()[0], 0.0);
  EXPECT_EQ(r.values()[1], 3.0);
  EXPECT_EQ(sigmoid(D::scalar(0.0)).item(), 0.5);
}

TEST(Activation, SigmoidSlopeAtZero) {
  auto x = D::scalar(0.0, true);
  backward(sigmoid(x));
  EXPECT_NEAR(x.grad()[0], 0.25, 1e-12);
  const double h = 1e-5;
  const double numeric = (1.0 / (1.0 + std::exp(-h)) - 1.0 / (1.0 + std::exp(h))) / (2 * h);
  EXPECT_NEAR(x.grad()[0], numeric, 1e-6);
}

TEST(BceLoss, AnalyticCases) {
  const std::vector<double> one{1.0};
  EXPECT_NEAR(bce_loss(D::from({1}, {0.5}), std::span<const double>(one)).item(),
              0.693147180559945, 1e-6);
  EXPECT_NEAR(bce_loss(D::from({1}, {1.0}), std::span<const double>(one)).item(), 0.0, 1e-6);
  const std::vector<double> y{1.0, 0.0};
  EXPECT_NEAR(bce_loss(D::from({2}, {0.8, 0.2}), std::span<const double>(y)).item(),
              -std::log(0.8), 1e-6);
  EXPECT_NEAR(-std::log(0.8), 0.22314, 1e-5);
}

TEST(BceLoss, MatchesOracleLoopAndIsNonNegative) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 9);
    std::vector<double> p(n), y(n);
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = uniform(rng, 1e-3, 1.0 - 1e-3);
      y[i] = uniform01(rng) < 0.5 ? 1.0 : 0.0;
      oracle += y[i] > 0 ? -std::log(p[i]) : -std::log(1.0 - p[i]);
    }
    const double loss = bce_loss(D::from({n}, p), std::span<const double>(y)).item();
    EXPECT_NEAR(loss, oracle / static_cast<double>(n), 1e-12);
    EXPECT_GE(loss, 0.0);
  }
}

TEST(BceLoss, ErrorsOnMismatchAndBadTargets) {
  const std::vector<double> y{1.0, 0.0};
  EXPECT_THROW(bce_loss(D::from({3}, {0.1, 0.2, 0.3}), std::span<const double>(y)), ShapeError);
  const std::vector<double> bad{0.5};
  EXPECT_THROW(bce_loss(D::from({1}, {0.1}), std::span<const double>(bad)), InvalidArgument);
}

TEST(BceLoss, SaturatedWrongPredictionStillHasGradient) {
  auto p = D::from({1}, {0.0}, true);
  const std::vector<double> y{1.0};
  backward(bce_loss(p, std::span<const double>(y)));
  EXPECT_LT(p.grad()[0], 0.0);
}

TEST(Numeric, NonFiniteOutputsThrow) {
  auto x = D::from({1}, {std::nan("")});
  EXPECT_THROW(sigmoid(x), NumericError);
  EXPECT_THROW(add(x, D::from({1}, {1.0})), NumericError);
}

TEST(GlobalPool, AvgAndMax) {
  auto x = D::from({1, 2, 3}, {1, 2, 3, -1, 5, 0});
  auto a = global_pool(x, Pooling::kAvg);
  auto m = global_pool(x, Pooling::kMax);
  EXPECT_EQ(a.shape(), (Shape{1, 2}));
  EXPECT_NEAR(a.values()[0], 2.0, 1e-15);
  EXPECT_NEAR(a.values()[1], 4.0 / 3.0, 1e-15);
  EXPECT_EQ(m.values()[0], 3.0);
  EXPECT_EQ(m.values()[1], 5.0);
}

// Operator gradient checks over ten seeds each.
class OperatorGradCheck : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(OperatorGradCheck, Conv2dWithBias) {
  Rng rng(GetParam());
  auto x = random_tensor({2, 2, 5, 4}, rng);
  auto w = random_tensor({3, 2, 3, 3}, rng);
  auto b = random_tensor({3}, rng);
  auto r = grad_check<double>([&] { return weighted_sum(conv2d(x, w, b, 1, 1), GetParam()); },
                              {x, w, b}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, Conv2dStridedUnpadded) {
  Rng rng(GetParam());
  auto x = random_tensor({1, 3, 7, 6}, rng);
  auto w = random_tensor({2, 3, 2, 2}, rng);
  auto r = grad_check<double>([&] { return weighted_sum(conv2d(x, w, D(), 2, 0), GetParam()); },
                              {x, w}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, BatchNormTrain) {
  Rng rng(GetParam());
  auto x = random_tensor({3, 2, 3, 4}, rng);
  auto state = BatchNormState<double>::create(2);
  for (auto& g : state.gamma.mutable_values()) g = uniform(rng, 0.5, 1.5);
  for (auto& b : state.beta.mutable_values()) b = normal(rng);
  auto r = grad_check<double>(
      [&] { return weighted_sum(batchnorm2d(x, state, Mode::kTrain), GetParam()); },
      {x, state.gamma, state.beta}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, BatchNormEval) {
  Rng rng(GetParam());
  auto x = random_tensor({2, 3, 3, 3}, rng);
  auto state = BatchNormState<double>::create(3);
  batchnorm2d(random_tensor({4, 3, 3, 3}, rng, false), state, Mode::kTrain);
  auto r = grad_check<double>(
      [&] { return weighted_sum(batchnorm2d(x, state, Mode::kEval), GetParam()); },
      {x, state.gamma, state.beta}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, MaxPool) {
  Rng rng(GetParam());
  auto x = random_tensor({2, 2, 5, 6}, rng);
  auto r = grad_check<double>([&] { return weighted_sum(maxpool2d(x), GetParam()); }, {x}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, Relu) {
  Rng rng(GetParam());
  auto x = away_from_zero({3, 7}, rng);
  auto r = grad_check<double>([&] { return weighted_sum(relu(x), GetParam()); }, {x}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, Sigmoid) {
  Rng rng(GetParam());
  auto x = random_tensor({3, 7}, rng, true, 3.0);
  auto r = grad_check<double>([&] { return weighted_sum(sigmoid(x), GetParam()); }, {x}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, BceLoss) {
  Rng rng(GetParam());
  std::vector<double> p(6), y(6);
  for (std::size_t i = 0; i < 6; ++i) {
    p[i] = uniform(rng, 0.05, 0.95);
    y[i] = i % 2 == 0 ? 1.0 : 0.0;
  }
  auto pt = D::from({2, 3}, p, true);
  auto r = grad_check<double>([&] { return bce_loss(pt, std::span<const double>(y)); }, {pt},
                              kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

TEST_P(OperatorGradCheck, GlobalPools) {
  Rng rng(GetParam());
  auto x = random_tensor({2, 3, 5}, rng);
  for (auto kind : {Pooling::kAvg, Pooling::kMax}) {
    auto r = grad_check<double>([&] { return weighted_sum(global_pool(x, kind), GetParam()); },
                                {x}, kEps);
    EXPECT_LE(r.max_rel_error, kOpTolerance);
  }
}

TEST_P(OperatorGradCheck, Elementwise) {
  Rng rng(GetParam());
  auto a = random_tensor({2, 4}, rng);
  auto b = random_tensor({2, 4}, rng);
  auto r = grad_check<double>(
      [&] {
        return add(mean(mul(a, b)), weighted_sum(reshape(add(a, b), {4, 2}), GetParam()));
      },
      {a, b}, kEps);
  EXPECT_LE(r.max_rel_error, kOpTolerance);
}

INSTANTIATE_TEST_SUITE_P(TenSeeds, OperatorGradCheck, ::testing::Range<std::uint64_t>(1, 11));

TEST(GradCheck, SumOfSquaresIsTight) {
  Rng rng(9);
  auto x = random_tensor({10}, rng);
  const double err = grad_check<double>([](const D& t) { return sum(mul(t, t)); }, x, 1e-5);
  EXPECT_LE(err, 1e-8);
}

TEST(GradCheck, SigmoidComposition) {
  Rng rng(10);
  auto x = random_tensor({8}, rng);
  const double err =
      grad_check<double>([](const D& t) { return sum(sigmoid(mul(sigmoid(t), t))); }, x, 1e-5);
  EXPECT_LE(err, 1e-6);
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1e-12, 0.0), 1e-4, 1e-18);
  EXPECT_NEAR(relative_error(2.0, 1.0), 0.5, 1e-15);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = D::full({5}, 0.3, true);
  for (auto& g : p.mutable_grad()) g = 1.0;
  AdamState<double> state;
  std::vector<D> params{p};
  adam_step(std::span<D>(params), state);
  for (double v : p.values()) EXPECT_NEAR(v, 0.3 - 1e-3, 1e-6);
  EXPECT_EQ(state.step_count, 1u);
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  auto p = D::full({3}, 1.0, true);
  AdamState<double> state;
  std::vector<D> params{p};
  for (auto& g : p.mutable_grad()) g = 2.0;
  adam_step(std::span<D>(params), state);
  const double m1 = state.first_moment[0][0];
  const double v1 = state.second_moment[0][0];
  p.zero_grad();
  adam_step(std::span<D>(params), state);
  EXPECT_LT(std::abs(state.first_moment[0][0]), std::abs(m1));
  EXPECT_LT(state.second_moment[0][0], v1);
  EXPECT_GE(state.second_moment[0][0], 0.0);
  auto q = D::full({3}, 1.0, true);
  AdamState<double> fresh;
  std::vector<D> qs{q};
  q.zero_grad();
  adam_step(std::span<D>(qs), fresh);
  for (double v : q.values()) EXPECT_EQ(v, 1.0);
}

TEST(Adam, DeterministicAndRejectsBadLr) {
  auto run = [] {
    auto p = D::from({2}, {0.5, -0.5}, true);
    AdamState<double> state;
    std::vector<D> params{p};
    for (int i = 0; i < 3; ++i) {
      p.zero_grad();
      backward(sum(mul(p, p)));
      adam_step(std::span<D>(params), state);
    }
    return std::vector<double>(p.values().begin(), p.values().end());
  };
  EXPECT_EQ(run(), run());
  auto p = D::full({1}, 1.0, true);
  std::vector<D> params{p};
  AdamState<double> state;
  state.lr = 0.0;
  EXPECT_THROW(adam_step(std::span<D>(params), state), InvalidArgument);
}

}  // namespace
}  // namespace walnet::ad
