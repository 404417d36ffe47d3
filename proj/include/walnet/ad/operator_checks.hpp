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
#include <string>
#include <vector>

namespace walnet::ad {

struct OperatorCheck {
  std::string name;
  double max_rel_error = 0.0;
};

// Runs grad_check in 64-bit on every differentiable operator with random
// inputs drawn from seed. Relu inputs are kept away from the kink.
std::vector<OperatorCheck> check_operators(std::uint64_t seed, double eps = 1e-6);

}  // namespace walnet::ad
