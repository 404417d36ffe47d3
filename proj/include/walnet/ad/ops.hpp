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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "walnet/ad/tensor.hpp"

namespace walnet::ad {

enum class Mode { kTrain, kEval };
enum class Activation { kRelu, kSigmoid };
enum class Pooling { kAvg, kMax };

// Which kernel set the operators dispatch to. Process-wide; the serial
// reference set exists for cross-checking and benchmarking.
enum class KernelBackend { kParallel, kReference };
void set_kernel_backend(KernelBackend backend);
KernelBackend kernel_backend();

// Running statistics plus the learnable affine pair for one batch-norm layer.
template <typename T>
struct BatchNormState {
  Tensor<T> gamma;
  Tensor<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
  // Train-mode batches folded into the running stats. Checkpoint loading sets
  // this too. Eval mode requires it to be nonzero.
  std::uint64_t updates = 0;

  static BatchNormState create(std::size_t channels);
  std::size_t channels() const { return running_mean.size(); }
  bool initialized() const { return updates > 0; }
};

// x: [N, C, H, W] or unbatched [C, H, W]; filters: [O, C, kh, kw]; bias: [O]
// or empty. Output spatial size is floor((H + 2*pad - kh) / stride) + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& filters, const Tensor<T>& bias,
                 std::size_t stride = 1, std::size_t pad = 0);

// Train mode normalizes with batch statistics over (N, H, W) and updates the
// running stats; eval mode uses the running stats.
template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& x, BatchNormState<T>& state, Mode mode);

// Non-overlapping 2x2 max pooling over the last two axes.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x);

template <typename T>
Tensor<T> activation(const Tensor<T>& x, Activation kind);

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return activation(x, Activation::kRelu);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return activation(x, Activation::kSigmoid);
}

// [N, C, ...] -> [N, C]: mean or max over every trailing axis.
template <typename T>
Tensor<T> global_pool(const Tensor<T>& x, Pooling kind);

inline constexpr double kBceClamp = 1e-7;

// Mean binary cross-entropy over every element of p against 0/1 targets.
// p is clamped to [1e-7, 1 - 1e-7]; the backward pass treats the clamp as
// the identity so saturated wrong predictions still receive gradient.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& p, std::span<const T> targets);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

}  // namespace walnet::ad
