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

#include "walnet/train/train.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "walnet/model/config.hpp"
#include "walnet/model/geometry.hpp"
#include "walnet/util/csv.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::train {
namespace {

bool long_enough(const dsp::LogmelSpectrogram& x) { return x.frames >= model::kSegmentFrames; }

// Groups indices into batches of equal frame count, in order of first
// appearance; full batches are emitted as soon as they fill.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                   const std::vector<dsp::LogmelSpectrogram>& x,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> open_frames;
  std::vector<std::vector<std::size_t>> open;
  for (auto i : order) {
    std::size_t slot = 0;
    while (slot < open.size() && open_frames[slot] != x[i].frames) ++slot;
    if (slot == open.size()) {
      open_frames.push_back(x[i].frames);
      open.emplace_back();
    }
    open[slot].push_back(i);
    if (open[slot].size() == batch_size) {
      batches.push_back(std::move(open[slot]));
      open[slot].clear();
    }
  }
  for (auto& b : open) {
    if (!b.empty()) batches.push_back(std::move(b));
  }
  return batches;
}

double selection_value(const MetricsReport& r, SelectionMetric m) {
  const double v = m == SelectionMetric::kMap ? r.map : r.mauc;
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

void check_features(const data::Corpus& corpus, const std::vector<dsp::LogmelSpectrogram>& x,
                    const char* what) {
  if (corpus.clips.size() != x.size()) {
    throw InvalidArgument(fmt::format("{}: {} clips but {} feature matrices", what,
                                      corpus.clips.size(), x.size()));
  }
}

}  // namespace

const char* to_string(SelectionMetric metric) {
  return metric == SelectionMetric::kMap ? "map" : "mauc";
}

SelectionMetric parse_selection_metric(const std::string& text) {
  if (text == "map") return SelectionMetric::kMap;
  if (text == "mauc") return SelectionMetric::kMauc;
  throw InvalidArgument("selection_metric must be 'map' or 'mauc', got '" + text + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (!(lr > 0) || !std::isfinite(lr)) throw InvalidArgument("lr must be positive");
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
}

void TrainConfig::write_to(KeyedText& doc) const {
  doc.set("epochs", static_cast<std::uint64_t>(epochs));
  doc.set("lr", lr);
  doc.set("batch_size", static_cast<std::uint64_t>(batch_size));
  doc.set("pooling", std::string(model::to_string(pooling)));
  doc.set("seed", seed);
  doc.set("selection_metric", std::string(to_string(selection_metric)));
}

TrainConfig TrainConfig::read_from(const KeyedText& doc) {
  TrainConfig cfg;
  cfg.epochs = doc.get_uint("epochs", cfg.epochs);
  cfg.lr = doc.get_double("lr", cfg.lr);
  cfg.batch_size = doc.get_uint("batch_size", cfg.batch_size);
  cfg.pooling = model::parse_pooling(doc.get_string("pooling", model::to_string(cfg.pooling)));
  cfg.seed = doc.get_uint("seed", cfg.seed);
  cfg.selection_metric = parse_selection_metric(
      doc.get_string("selection_metric", to_string(cfg.selection_metric)));
  return cfg;
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::vector<csv::Row> rows;
  for (const auto& e : epochs) {
    rows.push_back({std::to_string(e.epoch), format_double(e.train_loss), format_double(e.val_map),
                    format_double(e.val_mauc), std::to_string(e.steps),
                    e.epoch == selected_epoch ? "1" : "0"});
  }
  csv::write(path, {"epoch", "train_loss", "val_map", "val_mauc", "steps", "selected"}, rows);
}

std::vector<std::vector<double>> predict(model::Model<float>& model,
                                         const std::vector<dsp::LogmelSpectrogram>& features,
                                         std::size_t jobs) {
  std::vector<std::vector<double>> out(features.size());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (long_enough(features[i])) order.push_back(i);
  }
  constexpr std::size_t kEvalBatch = 16;
  const auto batches = make_batches(order, features, kEvalBatch);
  std::vector<std::exception_ptr> errors(batches.size());
  const auto count = static_cast<std::ptrdiff_t>(batches.size());
  const int threads = static_cast<int>(std::max<std::size_t>(jobs, 1));

#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    try {
      ad::NoGradGuard guard;
      const auto& batch = batches[static_cast<std::size_t>(b)];
      std::vector<const dsp::LogmelSpectrogram*> clips;
      for (auto i : batch) clips.push_back(&features[i]);
      auto result = model.forward(model::make_batch<float>(clips), ad::Mode::kEval);
      const auto values = result.recording.values();
      const std::size_t classes = result.recording.dim(1);
      for (std::size_t r = 0; r < batch.size(); ++r) {
        out[batch[r]].assign(values.begin() + static_cast<std::ptrdiff_t>(r * classes),
                             values.begin() + static_cast<std::ptrdiff_t>((r + 1) * classes));
      }
    } catch (...) {
      errors[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

MetricsReport score_corpus(model::Model<float>& model, const data::Corpus& corpus,
                           const std::vector<dsp::LogmelSpectrogram>& features, std::size_t jobs) {
  check_features(corpus, features, "evaluate");
  if (corpus.vocabulary.size() != model.config().class_count) {
    throw InvalidArgument(fmt::format("corpus has {} events but the model outputs {}",
                                      corpus.vocabulary.size(), model.config().class_count));
  }
  const auto scores = predict(model, features, jobs);
  std::vector<std::vector<std::size_t>> labels;
  for (const auto& clip : corpus.clips) labels.push_back(clip.labels);
  return score_events(scores, labels, corpus.vocabulary.names());
}

}  // namespace

MetricsReport evaluate(model::Model<float>& model, const data::Corpus& corpus,
                       const std::vector<dsp::LogmelSpectrogram>& features, std::size_t jobs) {
  auto report = score_corpus(model, corpus, features, jobs);
  for (const auto& name : report.excluded_from_map()) {
    spdlog::warn("event '{}' has no positives in the evaluation set; excluded from MAP", name);
  }
  return report;
}

TrainResult train(model::Model<float>& model, const data::Corpus& train_set,
                  const std::vector<dsp::LogmelSpectrogram>& train_features,
                  const data::Corpus& val_set,
                  const std::vector<dsp::LogmelSpectrogram>& val_features, const TrainConfig& cfg) {
  cfg.validate();
  check_features(train_set, train_features, "train");
  check_features(val_set, val_features, "validation");
  const std::size_t classes = model.config().class_count;
  if (train_set.vocabulary.size() != classes || val_set.vocabulary.size() != classes) {
    throw InvalidArgument(fmt::format("model outputs {} events but the corpora have {} and {}",
                                      classes, train_set.vocabulary.size(),
                                      val_set.vocabulary.size()));
  }
  if (train_set.vocabulary != val_set.vocabulary) {
    throw InvalidArgument("training and validation corpora use different vocabularies");
  }
  if (cfg.pooling != model.config().pooling) {
    throw InvalidArgument("train config pooling does not match the model's pooling");
  }

  TrainHistory history;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train_features.size(); ++i) {
    if (long_enough(train_features[i])) {
      usable.push_back(i);
    } else {
      ++history.skipped_clips;
      spdlog::warn("skipping clip '{}': {} frames is shorter than one segment",
                   train_set.clips[i].clip_id, train_features[i].frames);
    }
  }
  if (usable.empty()) throw InvalidArgument("no training clip is long enough for one segment");

  ad::AdamState<float> adam;
  adam.lr = cfg.lr;
  auto params = model.parameter_tensors();

  std::optional<TrainResult> best;
  double best_value = -std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, epoch));
    std::vector<std::size_t> order = usable;
    shuffle(std::span<std::size_t>(order), rng);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    const auto batches = make_batches(order, train_features, cfg.batch_size);
    for (const auto& batch : batches) {
      std::vector<const dsp::LogmelSpectrogram*> clips;
      std::vector<float> targets(batch.size() * classes, 0.0f);
      for (std::size_t r = 0; r < batch.size(); ++r) {
        clips.push_back(&train_features[batch[r]]);
        for (auto e : train_set.clips[batch[r]].labels) targets[r * classes + e] = 1.0f;
      }
      auto out = model.forward(model::make_batch<float>(clips), ad::Mode::kTrain);
      auto loss = ad::bce_loss(out.recording, std::span<const float>(targets));
      model.zero_grad();
      ad::backward(loss);
      ad::adam_step(std::span<ad::Tensor<float>>(params), adam);
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(seen);
    record.steps = batches.size();
    const auto report = val_set.clips.empty() ? MetricsReport{}
                                              : score_corpus(model, val_set, val_features, 1);
    record.val_map = val_set.clips.empty() ? std::nan("") : report.map;
    record.val_mauc = val_set.clips.empty() ? std::nan("") : report.mauc;
    history.epochs.push_back(record);

    const double value = val_set.clips.empty() ? static_cast<double>(epoch)
                                               : selection_value(report, cfg.selection_metric);
    if (!best || value > best_value) {
      best_value = value;
      history.selected_epoch = epoch;
      best.emplace(TrainResult{model.clone(), adam, {}});
    }
    spdlog::info("epoch {}/{}: train loss {:.5f}, val MAP {:.4f}, val MAUC {:.4f}{}", epoch,
                 cfg.epochs, record.train_loss, record.val_map, record.val_mauc,
                 history.selected_epoch == epoch ? " (selected)" : "");
  }
  best->history = std::move(history);
  return std::move(*best);
}

}  // namespace walnet::train
