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

#include "walnet/ad/adam.hpp"

#include <cmath>
#include <fmt/format.h>

#include "walnet/util/error.hpp"

namespace walnet::ad {

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  if (!(state.lr > 0)) throw InvalidArgument(fmt::format("adam: learning rate must be positive, got {}", state.lr));
  if (state.first_moment.empty() && state.second_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.numel(), T(0));
      state.second_moment.emplace_back(p.numel(), T(0));
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ShapeError(fmt::format("adam: state tracks {} tensors but {} were given",
                                 state.first_moment.size(), params.size()));
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_values();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    if (m.size() != values.size() || v.size() != values.size()) {
      throw ShapeError(fmt::format("adam: tensor {} has {} elements, moments have {}", k,
                                   values.size(), m.size()));
    }
    const bool has_grad = params[k].has_grad();
    const auto grad = params[k].grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? static_cast<double>(grad[i]) : 0.0;
      const double mi = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      const double vi = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      values[i] -= static_cast<T>(state.lr * (mi / c1) / (std::sqrt(vi / c2) + state.eps));
    }
  }
}

template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace walnet::ad
