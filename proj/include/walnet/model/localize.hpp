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
#include <vector>

#include "walnet/model/walnet.hpp"

namespace walnet::model {

struct TimeInterval {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct EventLocalization {
  std::size_t event = 0;
  std::vector<TimeInterval> intervals;
};

inline constexpr double kDefaultLocalizeThreshold = 0.5;

// Maximal runs of consecutive segments whose posterior is >= threshold, one
// interval per run, from the first segment's start to the last segment's
// end. Events without any run are omitted.
std::vector<EventLocalization> localize_segments(const SegmentPosteriors& seg, double threshold,
                                                 double frame_hop_seconds);

template <typename T>
std::vector<EventLocalization> localize(Model<T>& model, const dsp::LogmelSpectrogram& x,
                                        double threshold = kDefaultLocalizeThreshold);

}  // namespace walnet::model
