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

#include "walnet/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walnet/util/rng.hpp"

namespace walnet::ad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

template <typename T>
GradCheckReport grad_check(const std::function<Tensor<T>()>& loss, std::vector<Tensor<T>> inputs,
                           double eps, std::size_t max_coords_per_input, std::uint64_t seed) {
  std::vector<bool> restore(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    restore[k] = inputs[k].requires_grad();
    inputs[k].set_requires_grad(true);
    inputs[k].zero_grad();
  }
  backward(loss());
  std::vector<std::vector<T>> analytic;
  for (auto& x : inputs) analytic.emplace_back(x.grad().begin(), x.grad().end());

  GradCheckReport report;
  Rng rng(seed);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_values();
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > max_coords_per_input) {
      shuffle(std::span(coords), rng);
      coords.resize(max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const T original = values[i];
      double plus, minus;
      {
        NoGradGuard guard;
        values[i] = static_cast<T>(original + eps);
        plus = static_cast<double>(loss().item());
        values[i] = static_cast<T>(original - eps);
        minus = static_cast<double>(loss().item());
      }
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = relative_error(analytic[k][i], numeric);
      ++report.coordinates;
      report.checked.push_back({k, i, static_cast<double>(analytic[k][i]), numeric, plus, minus});
      if (err > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_input = k;
        report.worst_index = i;
        report.worst_analytic = analytic[k][i];
        report.worst_numeric = numeric;
      }
    }
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    inputs[k].zero_grad();
    inputs[k].set_requires_grad(restore[k]);
  }
  return report;
}

template <typename T>
double grad_check(const std::function<Tensor<T>(const Tensor<T>&)>& f, const Tensor<T>& x, double eps) {
  std::function<Tensor<T>()> closure = [&f, &x] { return f(x); };
  return grad_check<T>(closure, {x}, eps).max_rel_error;
}

template GradCheckReport grad_check<float>(const std::function<Tensor<float>()>&, std::vector<Tensor<float>>,
                                           double, std::size_t, std::uint64_t);
template GradCheckReport grad_check<double>(const std::function<Tensor<double>()>&, std::vector<Tensor<double>>,
                                            double, std::size_t, std::uint64_t);
template double grad_check<float>(const std::function<Tensor<float>(const Tensor<float>&)>&, const Tensor<float>&,
                                  double);
template double grad_check<double>(const std::function<Tensor<double>(const Tensor<double>&)>&,
                                   const Tensor<double>&, double);

}  // namespace walnet::ad
