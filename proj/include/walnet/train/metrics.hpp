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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace walnet::train {

// Non-interpolated AP: the mean, over positives taken in descending-score
// order, of the precision at each positive's rank. Equal scores keep their
// input order. Throws when labels hold no positive.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Probability that a random positive outscores a random negative, tied pairs
// counting one half. Throws unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct EventMetrics {
  std::size_t event = 0;
  std::string name;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double ap = 0.0;   // NaN when excluded
  double auc = 0.0;  // NaN when excluded
  bool in_map = false;
  bool in_mauc = false;
};

struct MetricsReport {
  std::vector<EventMetrics> per_event;
  double map = 0.0;   // over events with at least one positive
  double mauc = 0.0;  // over events with both positives and negatives
  std::size_t clips = 0;
  std::size_t skipped_clips = 0;

  std::vector<std::string> excluded_from_map() const;

  // event,positives,negatives,ap,auc,in_map,in_mauc
  void write_csv(const std::filesystem::path& path) const;
  // Keyed text: map, mauc, clips, skipped_clips, events_in_map, events_in_mauc,
  // excluded_from_map.
  void write_summary(const std::filesystem::path& path) const;
  std::string summary_text() const;
};

// scores[i][c] is clip i's posterior for event c; labels[i] holds its sorted
// positive events.
MetricsReport score_events(const std::vector<std::vector<double>>& scores,
                           const std::vector<std::vector<std::size_t>>& labels,
                           const std::vector<std::string>& event_names);

}  // namespace walnet::train
