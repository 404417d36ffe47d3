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
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "walnet/ad/tensor.hpp"

namespace walnet::ad {

struct CoordinateCheck {
  std::size_t input = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  // Loss at the coordinate nudged by +eps and -eps.
  double loss_plus = 0.0;
  double loss_minus = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<CoordinateCheck> checked;
  std::size_t coordinates = 0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Relative error used by the checker: |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

// Compares backward() against central differences for the listed inputs.
// loss() is re-evaluated with each coordinate nudged by +-eps. When an input
// has more than max_coords_per_input elements, that many coordinates are
// sampled with the given seed.
template <typename T>
GradCheckReport grad_check(const std::function<Tensor<T>()>& loss, std::vector<Tensor<T>> inputs,
                           double eps,
                           std::size_t max_coords_per_input = std::numeric_limits<std::size_t>::max(),
                           std::uint64_t seed = 0);

// Single-input form: returns the max relative error of f at x.
template <typename T>
double grad_check(const std::function<Tensor<T>(const Tensor<T>&)>& f, const Tensor<T>& x,
                  double eps);

}  // namespace walnet::ad
