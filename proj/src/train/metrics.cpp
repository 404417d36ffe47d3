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

#include "walnet/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "walnet/util/csv.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::train {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument(fmt::format("{}: {} scores but {} labels", what, scores.size(),
                                      labels.size()));
  }
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidArgument(fmt::format("{}: NaN score", what));
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidArgument(fmt::format("{}: labels must be 0 or 1", what));
  }
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "average_precision");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) throw InvalidArgument("AP undefined: no positive labels");
  return sum / static_cast<double>(hits);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "roc_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from mid-ranks of tied groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = order.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("AUC undefined: labels must contain both classes");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

std::vector<std::string> MetricsReport::excluded_from_map() const {
  std::vector<std::string> out;
  for (const auto& e : per_event) {
    if (!e.in_map) out.push_back(e.name);
  }
  return out;
}

void MetricsReport::write_csv(const std::filesystem::path& path) const {
  std::vector<csv::Row> rows;
  auto num = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& e : per_event) {
    rows.push_back({e.name, std::to_string(e.positives), std::to_string(e.negatives), num(e.ap),
                    num(e.auc), e.in_map ? "1" : "0", e.in_mauc ? "1" : "0"});
  }
  csv::write(path, {"event", "positives", "negatives", "ap", "auc", "in_map", "in_mauc"}, rows);
}

std::string MetricsReport::summary_text() const {
  KeyedText doc;
  std::size_t in_map = 0, in_mauc = 0;
  for (const auto& e : per_event) {
    in_map += e.in_map ? 1 : 0;
    in_mauc += e.in_mauc ? 1 : 0;
  }
  doc.set("map", map);
  doc.set("mauc", mauc);
  doc.set("clips", static_cast<std::uint64_t>(clips));
  doc.set("skipped_clips", static_cast<std::uint64_t>(skipped_clips));
  doc.set("events_in_map", static_cast<std::uint64_t>(in_map));
  doc.set("events_in_mauc", static_cast<std::uint64_t>(in_mauc));
  doc.set("excluded_from_map", join(excluded_from_map(), ";"));
  return doc.to_string();
}

void MetricsReport::write_summary(const std::filesystem::path& path) const {
  write_file(path, summary_text());
}

MetricsReport score_events(const std::vector<std::vector<double>>& scores,
                           const std::vector<std::vector<std::size_t>>& labels,
                           const std::vector<std::string>& event_names) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("score_events: score and label counts differ");
  }
  const std::size_t events = event_names.size();
  MetricsReport report;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].empty()) {
      ++report.skipped_clips;
      continue;
    }
    if (scores[i].size() != events) {
      throw InvalidArgument(fmt::format("score_events: clip {} has {} scores for {} events", i,
                                        scores[i].size(), events));
    }
    rows.push_back(i);
  }
  report.clips = rows.size();

  double ap_sum = 0.0, auc_sum = 0.0;
  std::size_t ap_n = 0, auc_n = 0;
  std::vector<double> s(rows.size());
  std::vector<int> y(rows.size());
  for (std::size_t e = 0; e < events; ++e) {
    EventMetrics m;
    m.event = e;
    m.name = event_names[e];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      s[r] = scores[rows[r]][e];
      const auto& l = labels[rows[r]];
      y[r] = std::binary_search(l.begin(), l.end(), e) ? 1 : 0;
      m.positives += static_cast<std::size_t>(y[r]);
    }
    m.negatives = rows.size() - m.positives;
    m.ap = m.auc = std::numeric_limits<double>::quiet_NaN();
    if (m.positives > 0) {
      m.ap = average_precision(s, y);
      m.in_map = true;
      ap_sum += m.ap;
      ++ap_n;
    }
    if (m.positives > 0 && m.negatives > 0) {
      m.auc = roc_auc(s, y);
      m.in_mauc = true;
      auc_sum += m.auc;
      ++auc_n;
    }
    report.per_event.push_back(std::move(m));
  }
  report.map = ap_n ? ap_sum / static_cast<double>(ap_n) : std::numeric_limits<double>::quiet_NaN();
  report.mauc =
      auc_n ? auc_sum / static_cast<double>(auc_n) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace walnet::train
