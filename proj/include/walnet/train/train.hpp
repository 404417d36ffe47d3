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
#include <functional>
#include <string>
#include <vector>

#include "walnet/ad/adam.hpp"
#include "walnet/data/corpus.hpp"
#include "walnet/dsp/features.hpp"
#include "walnet/model/walnet.hpp"
#include "walnet/train/metrics.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::train {

enum class SelectionMetric { kMap, kMauc };

const char* to_string(SelectionMetric metric);
SelectionMetric parse_selection_metric(const std::string& text);

struct TrainConfig {
  std::size_t epochs = 30;
  double lr = 1e-3;
  std::size_t batch_size = 16;
  ad::Pooling pooling = ad::Pooling::kAvg;
  std::uint64_t seed = 1;
  SelectionMetric selection_metric = SelectionMetric::kMap;

  void validate() const;
  // Keys: epochs, lr, batch_size, pooling, seed, selection_metric.
  void write_to(KeyedText& doc) const;
  static TrainConfig read_from(const KeyedText& doc);
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_map = 0.0;
  double val_mauc = 0.0;
  std::size_t steps = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;  // 1-based
  std::size_t skipped_clips = 0;

  // epoch,train_loss,val_map,val_mauc,steps,selected
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
  model::Model<float> best;
  ad::AdamState<float> adam;  // optimizer state at the selected epoch
  TrainHistory history;
};

// Clips shorter than one segment are skipped and counted. Each epoch visits
// the remaining clips in a seeded shuffled order and groups them into
// batches of equal frame count, so variable-length corpora degrade to
// smaller batches. The model passed in holds the final-epoch weights
// afterwards; the returned model is the copy selected on validation.
TrainResult train(model::Model<float>& model, const data::Corpus& train_set,
                  const std::vector<dsp::LogmelSpectrogram>& train_features,
                  const data::Corpus& val_set,
                  const std::vector<dsp::LogmelSpectrogram>& val_features, const TrainConfig& cfg);

// Eval-mode recording posteriors per clip (empty for clips shorter than one
// segment). Equal-length clips are batched; jobs > 1 spreads batches over
// threads. Results do not depend on jobs.
std::vector<std::vector<double>> predict(model::Model<float>& model,
                                         const std::vector<dsp::LogmelSpectrogram>& features,
                                         std::size_t jobs = 1);

MetricsReport evaluate(model::Model<float>& model, const data::Corpus& corpus,
                       const std::vector<dsp::LogmelSpectrogram>& features, std::size_t jobs = 1);

}  // namespace walnet::train
