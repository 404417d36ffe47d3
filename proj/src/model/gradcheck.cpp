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

#include "walnet/model/gradcheck.hpp"

#include <cmath>
#include <limits>

#include "walnet/model/walnet.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::model {

ModelGradCheckReport check_model_gradients(const ModelConfig& config, std::uint64_t seed,
                                           const ModelGradCheckOptions& options) {
  auto model = Model<double>::build(config, seed);
  Rng rng(mix_seed(seed, 1));
  std::vector<double> x(options.batch * options.frames * config.mel_bands);
  for (auto& v : x) v = normal(rng);
  const auto input = ad::Tensor<double>::from({options.batch, 1, options.frames, config.mel_bands},
                                              std::move(x));
  std::vector<double> targets(options.batch * config.class_count);
  for (auto& t : targets) t = uniform01(rng) < 0.5 ? 1.0 : 0.0;

  const std::function<ad::Tensor<double>()> loss = [&] {
    auto out = model.forward(input, ad::Mode::kTrain);
    return ad::bce_loss(out.recording, std::span<const double>(targets));
  };
  double loss_value = 0.0;
  {
    ad::NoGradGuard guard;
    loss_value = loss().item();
  }

  ModelGradCheckReport report;
  report.raw = ad::grad_check<double>(loss, model.parameter_tensors(), options.eps,
                                      options.coords_per_tensor, mix_seed(seed, 2));
  report.resolution = 4.0 * std::numeric_limits<double>::epsilon() *
                      std::max(1.0, std::abs(loss_value)) / options.eps;
  report.kink_tolerance = options.kink_tolerance;
  for (const auto& c : report.raw.checked) {
    const double forward_diff = (c.loss_plus - loss_value) / options.eps;
    const double backward_diff = (loss_value - c.loss_minus) / options.eps;
    const double gap = std::abs(forward_diff - backward_diff);
    if (gap > 2.0 * report.resolution &&
        ad::relative_error(forward_diff, backward_diff) > options.kink_tolerance) {
      ++report.kink_coordinates;
      report.kink_max_rel_error =
          std::max(report.kink_max_rel_error, ad::relative_error(c.analytic, c.numeric));
    } else {
      const double err = ad::relative_error(c.analytic, c.numeric);
      report.max_rel_error = std::max(report.max_rel_error, err);
      if (std::abs(c.analytic - c.numeric) <= report.resolution) {
        report.roundoff_limited += err > 1e-4;
      } else {
        report.gated_rel_error = std::max(report.gated_rel_error, err);
      }
    }
  }
  return report;
}

}  // namespace walnet::model
