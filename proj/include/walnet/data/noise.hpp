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
#include <filesystem>
#include <string>
#include <vector>

#include "walnet/data/corpus.hpp"

namespace walnet::data {

// Extends every span shorter than target_len_s symmetrically by half the
// shortfall on each side, clamped to the source with no compensation. A
// source shorter than the target is taken whole. Labels never change, spans
// never shrink, and truth intervals shift with the new start.
Corpus expand_spans(const Corpus& corpus, double target_len_s);

struct EventFlips {
  std::vector<std::string> demoted;   // positive -> negative
  std::vector<std::string> promoted;  // negative -> positive
};

struct CorruptionPlan {
  double rate = 0.0;  // percent
  std::uint64_t seed = 0;
  std::vector<std::string> events;  // vocabulary names, one per flips entry
  std::vector<EventFlips> flips;

  std::size_t flip_count() const;
  std::string to_text() const;
  static CorruptionPlan parse(const std::string& text, const std::string& origin);
  void write(const std::filesystem::path& path) const;
  static CorruptionPlan read(const std::filesystem::path& path);
};

// Flips per event k = round(r/100 * P_e / 2) positives to negative and k
// negatives to positive, chosen uniformly with a per-event stream.
CorruptionPlan plan_corruption(const Corpus& corpus, double rate, std::uint64_t seed);

// Applies a plan to the corpus it was drawn from; throws when a demoted clip
// is not positive or a promoted clip is not negative.
Corpus apply_plan(const Corpus& corpus, const CorruptionPlan& plan);

struct CorruptionResult {
  Corpus corpus;
  CorruptionPlan plan;
};

CorruptionResult corrupt_labels(const Corpus& corpus, double rate, std::uint64_t seed);

// Retrieval-style relabeling from ground truth: for each event, round(p *
// top_k) clips that contain it and the rest that do not. A clip's labels
// become exactly the events it was retrieved for; clips never retrieved are
// dropped.
Corpus simulate_wild(const Corpus& truth_corpus, double retrieval_precision, std::size_t top_k,
                     std::uint64_t seed);

}  // namespace walnet::data
