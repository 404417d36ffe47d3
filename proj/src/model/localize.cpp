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

#include "walnet/model/localize.hpp"

#include <string>

#include "walnet/util/error.hpp"

namespace walnet::model {

std::vector<EventLocalization> localize_segments(const SegmentPosteriors& seg, double threshold,
                                                 double frame_hop_seconds) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("localization threshold must lie in (0, 1), got " +
                          std::to_string(threshold));
  }
  std::vector<EventLocalization> out;
  for (std::size_t c = 0; c < seg.classes; ++c) {
    EventLocalization loc{c, {}};
    std::size_t k = 0;
    while (k < seg.segments) {
      if (seg.at(k, c) < threshold) {
        ++k;
        continue;
      }
      const std::size_t first = k;
      while (k + 1 < seg.segments && seg.at(k + 1, c) >= threshold) ++k;
      const auto start = segment_span(first, seg.segments).start;
      const auto end = segment_span(k, seg.segments).end;
      loc.intervals.push_back({static_cast<double>(start) * frame_hop_seconds,
                               static_cast<double>(end) * frame_hop_seconds});
      ++k;
    }
    if (!loc.intervals.empty()) out.push_back(std::move(loc));
  }
  return out;
}

template <typename T>
std::vector<EventLocalization> localize(Model<T>& model, const dsp::LogmelSpectrogram& x,
                                        double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("localization threshold must lie in (0, 1), got " +
                          std::to_string(threshold));
  }
  auto [seg, rec] = forward(model, x, ad::Mode::kEval);
  return localize_segments(seg, threshold, x.frame_hop_seconds);
}

template std::vector<EventLocalization> localize<float>(Model<float>&,
                                                        const dsp::LogmelSpectrogram&, double);
template std::vector<EventLocalization> localize<double>(Model<double>&,
                                                         const dsp::LogmelSpectrogram&, double);

}  // namespace walnet::model
