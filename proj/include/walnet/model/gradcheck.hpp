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

#include "walnet/ad/gradcheck.hpp"
#include "walnet/model/config.hpp"

namespace walnet::model {

struct ModelGradCheckOptions {
  std::size_t frames = 128;
  std::size_t batch = 3;
  double eps = 1e-6;
  // Coordinates sampled per parameter tensor.
  std::size_t coords_per_tensor = 12;
  double kink_tolerance = 1e-3;
};

struct ModelGradCheckReport {
  ad::GradCheckReport raw;
  // Central differences carry a roundoff error of about
  // resolution = 4 * machine eps * max(1, |loss|) / eps. A coordinate
  // passes when its relative error is within tolerance or its absolute
  // error is within resolution, so tiny gradients (for example the
  // exactly-zero shift gradient of a norm layer feeding another norm layer
  // through a linear path) are judged on the absolute scale.
  // max_rel_error covers every checked coordinate except switch-point
  // crossings; gated_rel_error only those with absolute error above
  // resolution. roundoff_limited counts coordinates that pass on the
  // absolute scale alone with a relative error above 1e-4.
  double max_rel_error = 0.0;
  double gated_rel_error = 0.0;
  std::size_t roundoff_limited = 0;
  double resolution = 0.0;
  // Coordinates whose +-eps nudge crosses a ReLU or max-pool switch point,
  // detected by the one-sided differences disagreeing by more than
  // kink_tolerance (relative) and by more than twice the resolution.
  // Excluded from max_rel_error; the largest excluded error is kept for
  // reporting. A check where more than a tenth of the coordinates are
  // excluded fails.
  std::size_t kink_coordinates = 0;
  double kink_max_rel_error = 0.0;
  double kink_tolerance = 0.0;

  bool passed(double tolerance) const {
    return gated_rel_error <= tolerance && kink_coordinates * 10 <= raw.coordinates;
  }
};

// Builds a 64-bit model from config and seed, feeds a random batch with
// random multi-hot targets, and checks the gradient of the training loss with
// respect to every parameter tensor.
ModelGradCheckReport check_model_gradients(const ModelConfig& config, std::uint64_t seed,
                                           const ModelGradCheckOptions& options = {});

}  // namespace walnet::model
