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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "walnet/data/audio_source.hpp"
#include "walnet/data/synth.hpp"
#include "walnet/model/checkpoint.hpp"
#include "walnet/train/metrics.hpp"
#include "walnet/train/train.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::train {
namespace {

double ap(std::vector<double> s, std::vector<int> l) {
  return average_precision(std::span<const double>(s), std::span<const int>(l));
}
double auc(std::vector<double> s, std::vector<int> l) {
  return roc_auc(std::span<const double>(s), std::span<const int>(l));
}

// Rank of item i: items with a higher score, or an equal score earlier in the
// input, come first.
std::size_t rank_of(const std::vector<double>& s, std::size_t i) {
  std::size_t r = 1;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++r;
  }
  return r;
}

double ap_oracle(const std::vector<double>& s, const std::vector<int>& l) {
  double total = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!l[i]) continue;
    ++positives;
    const std::size_t r = rank_of(s, i);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < s.size(); ++j) hits += l[j] && rank_of(s, j) <= r;
    total += static_cast<double>(hits) / static_cast<double>(r);
  }
  return total / static_cast<double>(positives);
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& l) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!l[i] || l[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(Metrics, AveragePrecisionExamples) {
  EXPECT_DOUBLE_EQ(ap({0.9, 0.1}, {1, 0}), 1.0);
  EXPECT_NEAR(ap({0.9, 0.8, 0.3}, {1, 0, 1}), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(ap({0.9, 0.8, 0.3}, {1, 0, 1}), 0.8333, 1e-4);
  EXPECT_DOUBLE_EQ(ap({0.1, 0.7, 0.3}, {1, 1, 1}), 1.0);
  EXPECT_THROW(ap({0.1, 0.2}, {0, 0}), InvalidArgument);
  EXPECT_THROW(ap({0.1, 0.2}, {1}), InvalidArgument);
}

TEST(Metrics, RocAucExamples) {
  EXPECT_NEAR(auc({0.9, 0.8, 0.3}, {1, 0, 1}), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}), 0.5);
  EXPECT_THROW(auc({0.1, 0.2}, {1, 1}), InvalidArgument);
}

TEST(Metrics, MatchEnumerationOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 11);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so ties are common.
      s[i] = static_cast<double>(uniform_index(rng, 5)) / 4.0;
      l[i] = uniform01(rng) < 0.5;
    }
    l[0] = 1;
    l[1] = 0;
    EXPECT_NEAR(ap(s, l), ap_oracle(s, l), 1e-12);
    EXPECT_NEAR(auc(s, l), auc_oracle(s, l), 1e-12);
    EXPECT_GE(ap(s, l), 0.0);
    EXPECT_LE(ap(s, l), 1.0);
  }
}

TEST(Metrics, InvariantUnderMonotoneMaps) {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 30);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = uniform01(rng);
      l[i] = uniform01(rng) < 0.4;
    }
    l[0] = 1;
    l[1] = 0;
    const double a = uniform(rng, 0.1, 5.0), b = normal(rng);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(a * s[i] + b) + std::pow(s[i], 3.0);
    EXPECT_NEAR(ap(s, l), ap(t, l), 1e-12);
    EXPECT_NEAR(auc(s, l), auc(t, l), 1e-12);
  }
}

TEST(Metrics, DuplicateClipRegression) {
  // Duplicating the only negative: AUC is unchanged, AP drops through rank.
  EXPECT_NEAR(auc({0.9, 0.8, 0.3, 0.8}, {1, 0, 1, 0}), 0.5, 1e-12);
  EXPECT_NEAR(ap({0.9, 0.8, 0.3, 0.8}, {1, 0, 1, 0}), (1.0 + 2.0 / 4.0) / 2.0, 1e-12);
  // Duplicating a positive shifts both.
  EXPECT_NEAR(ap({0.9, 0.8, 0.3, 0.3}, {1, 0, 1, 1}), (1.0 + 2.0 / 3.0 + 3.0 / 4.0) / 3.0, 1e-12);
  EXPECT_NEAR(auc({0.9, 0.8, 0.3, 0.3}, {1, 0, 1, 1}), 1.0 / 3.0, 1e-12);
}

TEST(Metrics, ReportMeansAndExclusions) {
  const std::vector<std::vector<double>> scores{{0.9, 0.2, 0.5}, {0.1, 0.8, 0.5}, {0.4, 0.3, 0.5}};
  const std::vector<std::vector<std::size_t>> labels{{0}, {1}, {0, 1}};
  const auto r = score_events(scores, labels, {"a", "b", "c"});
  ASSERT_EQ(r.per_event.size(), 3u);
  EXPECT_FALSE(r.per_event[2].in_map);
  EXPECT_TRUE(std::isnan(r.per_event[2].ap));
  EXPECT_EQ(r.excluded_from_map(), (std::vector<std::string>{"c"}));
  EXPECT_NEAR(r.map, (r.per_event[0].ap + r.per_event[1].ap) / 2.0, 1e-9);
  EXPECT_NEAR(r.mauc, (r.per_event[0].auc + r.per_event[1].auc) / 2.0, 1e-9);
  EXPECT_EQ(r.per_event[0].positives, 2u);
  EXPECT_EQ(r.per_event[0].negatives, 1u);
}

TEST(Metrics, ConstantScoresGiveHalfAuc) {
  std::vector<std::vector<double>> scores(6, std::vector<double>(2, 0.3));
  const std::vector<std::vector<std::size_t>> labels{{0}, {1}, {}, {0, 1}, {0}, {}};
  const auto r = score_events(scores, labels, {"a", "b"});
  for (const auto& e : r.per_event) EXPECT_DOUBLE_EQ(e.auc, 0.5);
}

TEST(Metrics, CsvWritesExcludedAsEmpty) {
  const auto path = std::filesystem::temp_directory_path() / "walnet_metrics.csv";
  const auto r = score_events({{0.9, 0.1}, {0.2, 0.3}}, {{0}, {}}, {"a", "b"});
  r.write_csv(path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("b,0,2,,,0,0"), std::string::npos) << ss.str();
  std::filesystem::remove(path);
}

TEST(TrainConfig, ValidationAndKeyedText) {
  TrainConfig c;
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.epochs = 4;
  c.selection_metric = SelectionMetric::kMauc;
  KeyedText kt;
  c.write_to(kt);
  const TrainConfig back = TrainConfig::read_from(KeyedText::parse(kt.to_string(), "t"));
  EXPECT_EQ(back.epochs, 4u);
  EXPECT_EQ(back.selection_metric, SelectionMetric::kMauc);
  EXPECT_THROW(parse_selection_metric("f1"), InvalidArgument);
}

// Small learnable setup shared by the training tests.
struct Fixture {
  data::Corpus train_set, val_set;
  std::vector<dsp::LogmelSpectrogram> train_x, val_x;
  model::ModelConfig model_config;

  static const Fixture& get() {
    static const Fixture f = [] {
      Fixture out;
      data::SynthSpec spec;
      spec.event_count = 3;
      spec.clip_count = 30;
      spec.clip_length_s = 3.0;
      spec.events_per_clip = {0.2, 0.6, 0.2};
      spec.min_event_s = 1.0;
      spec.max_event_s = 2.0;
      spec.min_snr_db = 0.0;
      spec.max_snr_db = 6.0;
      const auto split = data::split_corpus(data::synthesize_corpus(spec), {0.8, 0.2}, 3);
      out.train_set = split.train;
      out.val_set = split.val;
      out.train_x = data::corpus_features(out.train_set);
      out.val_x = data::corpus_features(out.val_set);
      out.model_config.class_count = 3;
      out.model_config.block_filters = {4, 4, 8, 8, 8, 8};
      out.model_config.convs_per_block = 1;
      out.model_config.l7_filters = 16;
      return out;
    }();
    return f;
  }
};

TrainResult run(std::size_t epochs, std::uint64_t seed = 1, double lr = 1e-3) {
  const Fixture& f = Fixture::get();
  auto m = model::Model<float>::build(f.model_config, seed);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 4;
  cfg.seed = seed;
  cfg.lr = lr;
  return train(m, f.train_set, f.train_x, f.val_set, f.val_x, cfg);
}

TEST(Train, Deterministic) {
  const auto a = run(3);
  const auto b = run(3);
  ASSERT_EQ(a.history.epochs.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.history.epochs[e].train_loss, b.history.epochs[e].train_loss);
    EXPECT_EQ(a.history.epochs[e].val_map, b.history.epochs[e].val_map);
  }
  EXPECT_EQ(a.history.selected_epoch, b.history.selected_epoch);
  EXPECT_EQ(model::encode_checkpoint(a.best, a.adam), model::encode_checkpoint(b.best, b.adam));
}

TEST(Train, LossDecreasesAndSelectionIsArgmax) {
  const auto r = run(10);
  const auto& h = r.history;
  EXPECT_LT(h.epochs.back().train_loss, h.epochs.front().train_loss);
  double best = -1.0;
  for (const auto& e : h.epochs) best = std::max(best, e.val_map);
  EXPECT_EQ(h.epochs[h.selected_epoch - 1].val_map, best);
  EXPECT_EQ(r.adam.step_count, h.epochs[0].steps * h.selected_epoch);
}

TEST(Train, ZeroLearningRateRejected) { EXPECT_THROW(run(1, 1, 0.0), InvalidArgument); }

TEST(Train, SingleClipOverfits) {
  const Fixture& f = Fixture::get();
  data::Corpus one = f.train_set;
  std::size_t pick = 0;
  while (one.clips[pick].labels.empty()) ++pick;
  one.clips = {f.train_set.clips[pick]};
  const std::vector<dsp::LogmelSpectrogram> x{f.train_x[pick]};
  auto m = model::Model<float>::build(f.model_config, 4);
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.lr = 1e-2;
  const auto r = train(m, one, x, data::Corpus{one.vocabulary, {}, "val", {}}, {}, cfg);
  EXPECT_LT(r.history.epochs.back().train_loss, 0.05);
  EXPECT_EQ(r.history.selected_epoch, cfg.epochs);
}

TEST(Train, ShortClipsAreSkippedAndCounted) {
  const Fixture& f = Fixture::get();
  data::Corpus set = f.train_set;
  auto x = f.train_x;
  set.clips.resize(4);
  x.resize(4);
  x[1].frames = 100;
  x[1].values.resize(100 * 128);
  auto m = model::Model<float>::build(f.model_config, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto r = train(m, set, x, f.val_set, f.val_x, cfg);
  EXPECT_EQ(r.history.skipped_clips, 1u);
  const auto scores = predict(m, x);
  EXPECT_TRUE(scores[1].empty());
  EXPECT_EQ(scores[0].size(), 3u);
}

TEST(Train, PredictIsIndependentOfJobs) {
  const Fixture& f = Fixture::get();
  auto r = run(1);
  EXPECT_EQ(predict(r.best, f.val_x, 1), predict(r.best, f.val_x, 3));
  const auto report = evaluate(r.best, f.val_set, f.val_x);
  EXPECT_EQ(report.clips, f.val_set.clips.size());
}

}  // namespace
}  // namespace walnet::train
