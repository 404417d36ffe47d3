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

#include "walnet/ad/operator_checks.hpp"

#include "walnet/ad/gradcheck.hpp"
#include "walnet/ad/ops.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::ad {
namespace {

using D = Tensor<double>;

D random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = scale * normal(rng);
  return D::from(std::move(shape), std::move(v), true);
}

// Contracting with fixed random weights makes the scalar depend on every
// output element with a distinct slope.
D contract(const D& y, Rng& rng) {
  auto w = random_tensor(y.shape(), rng);
  w.set_requires_grad(false);
  return sum(mul(y, w));
}

}  // namespace

std::vector<OperatorCheck> check_operators(std::uint64_t seed, double eps) {
  std::vector<OperatorCheck> out;
  auto record = [&](std::string name, const std::function<D(Rng&)>& loss,
                    std::vector<D> inputs, std::uint64_t salt) {
    const std::function<D()> closure = [&loss, seed, salt] {
      Rng weights(mix_seed(seed, salt));
      return loss(weights);
    };
    out.push_back({std::move(name), grad_check<double>(closure, std::move(inputs), eps).max_rel_error});
  };

  Rng rng(seed);
  {
    auto x = random_tensor({2, 2, 5, 4}, rng);
    auto w = random_tensor({3, 2, 3, 3}, rng);
    auto b = random_tensor({3}, rng);
    record("conv2d", [&](Rng& r) { return contract(conv2d(x, w, b, 1, 1), r); }, {x, w, b}, 1);
  }
  {
    auto x = random_tensor({1, 3, 7, 6}, rng);
    auto w = random_tensor({2, 3, 2, 2}, rng);
    record("conv2d_strided", [&](Rng& r) { return contract(conv2d(x, w, D(), 2, 0), r); },
           {x, w}, 2);
  }
  {
    auto x = random_tensor({3, 2, 3, 4}, rng);
    auto state = BatchNormState<double>::create(2);
    for (auto& g : state.gamma.mutable_values()) g = uniform(rng, 0.5, 1.5);
    for (auto& b : state.beta.mutable_values()) b = normal(rng);
    record("batchnorm2d_train",
           [&](Rng& r) { return contract(batchnorm2d(x, state, Mode::kTrain), r); },
           {x, state.gamma, state.beta}, 3);
    record("batchnorm2d_eval",
           [&](Rng& r) { return contract(batchnorm2d(x, state, Mode::kEval), r); },
           {x, state.gamma, state.beta}, 4);
  }
  {
    auto x = random_tensor({2, 2, 5, 6}, rng);
    record("maxpool2d", [&](Rng& r) { return contract(maxpool2d(x), r); }, {x}, 5);
  }
  {
    auto x = random_tensor({3, 7}, rng);
    for (auto& v : x.mutable_values()) v += v >= 0 ? 0.05 : -0.05;
    record("relu", [&](Rng& r) { return contract(relu(x), r); }, {x}, 6);
  }
  {
    auto x = random_tensor({3, 7}, rng, 3.0);
    record("sigmoid", [&](Rng& r) { return contract(sigmoid(x), r); }, {x}, 7);
  }
  {
    std::vector<double> p(6), y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      p[i] = uniform(rng, 0.05, 0.95);
      y[i] = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    }
    auto pt = D::from({2, 3}, p, true);
    record("bce_loss", [&](Rng&) { return bce_loss(pt, std::span<const double>(y)); }, {pt}, 8);
  }
  {
    auto x = random_tensor({2, 3, 5}, rng);
    record("global_pool_avg", [&](Rng& r) { return contract(global_pool(x, Pooling::kAvg), r); },
           {x}, 9);
    record("global_pool_max", [&](Rng& r) { return contract(global_pool(x, Pooling::kMax), r); },
           {x}, 10);
  }
  {
    auto a = random_tensor({2, 4}, rng);
    auto b = random_tensor({2, 4}, rng);
    record("add_mul_mean_reshape",
           [&](Rng& r) { return add(mean(mul(a, b)), contract(reshape(add(a, b), {4, 2}), r)); },
           {a, b}, 11);
  }
  return out;
}

}  // namespace walnet::ad
