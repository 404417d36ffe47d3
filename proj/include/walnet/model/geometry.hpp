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

#include <cstddef>

namespace walnet::model {

inline constexpr std::size_t kSegmentFrames = 128;
inline constexpr std::size_t kSegmentHopFrames = 64;

// Segments produced for an n-frame input: six floor-halvings followed by the
// 2-wide L7 convolution, i.e. floor(n / 64) - 1. Throws for n < 128.
std::size_t segment_count(std::size_t frames);

struct FrameSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  bool operator==(const FrameSpan&) const = default;
};

// Frames [64k, 64k + 128) covered by segment k of a K-segment output.
FrameSpan segment_span(std::size_t k, std::size_t segments);

}  // namespace walnet::model
