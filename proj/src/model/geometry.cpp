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

#include "walnet/model/geometry.hpp"

#include <string>

#include "walnet/util/error.hpp"

namespace walnet::model {

std::size_t segment_count(std::size_t frames) {
  if (frames < kSegmentFrames) {
    throw InvalidArgument("input shorter than one segment: " + std::to_string(frames) +
                          " frames, need at least " + std::to_string(kSegmentFrames));
  }
  return frames / kSegmentHopFrames - 1;
}

FrameSpan segment_span(std::size_t k, std::size_t segments) {
  if (k >= segments) {
    throw InvalidArgument("segment index " + std::to_string(k) + " out of range for " +
                          std::to_string(segments) + " segments");
  }
  return {k * kSegmentHopFrames, k * kSegmentHopFrames + kSegmentFrames};
}

}  // namespace walnet::model
