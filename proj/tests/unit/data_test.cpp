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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "walnet/data/audio_source.hpp"
#include "walnet/data/corpus.hpp"
#include "walnet/data/noise.hpp"
#include "walnet/data/synth.hpp"
#include "walnet/dsp/audio_io.hpp"
#include "walnet/util/error.hpp"

namespace walnet::data {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

WeakClip make_clip(std::string id, double start, double end, double dur,
                   std::vector<std::size_t> labels = {}) {
  WeakClip c;
  c.clip_id = std::move(id);
  c.span = {"src_" + c.clip_id, start, end, dur};
  c.labels = std::move(labels);
  return c;
}

SynthSpec small_spec(std::size_t clips = 60) {
  SynthSpec s;
  s.clip_count = clips;
  s.event_count = 4;
  return s;
}

// Corpus of n clips where clip i carries event e for every e in pattern(i).
Corpus labeled_corpus(std::size_t n, std::size_t events,
                      const std::function<bool(std::size_t, std::size_t)>& has) {
  Corpus c;
  std::vector<std::string> names;
  for (std::size_t e = 0; e < events; ++e) names.push_back("ev" + std::to_string(e));
  c.vocabulary = EventVocabulary(names);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> labels;
    for (std::size_t e = 0; e < events; ++e) {
      if (has(i, e)) labels.push_back(e);
    }
    c.clips.push_back(make_clip("c" + std::to_string(1000 + i), 20, 30, 300, labels));
  }
  return c;
}

bool same_labels(const Corpus& a, const Corpus& b) {
  if (a.clips.size() != b.clips.size()) return false;
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    if (a.clips[i].clip_id != b.clips[i].clip_id || a.clips[i].labels != b.clips[i].labels) {
      return false;
    }
  }
  return true;
}

TEST(Vocabulary, RejectsDuplicatesAndFindsNames) {
  EXPECT_THROW(EventVocabulary({"a", "b", "a"}), InvalidArgument);
  EXPECT_THROW(EventVocabulary({"a", ""}), InvalidArgument);
  EventVocabulary v({"Siren", "Music"});
  EXPECT_EQ(v.find("Music"), 1u);
  EXPECT_FALSE(v.find("Speech").has_value());
}

TEST(Manifest, EmptyClipListLoads) {
  TempDir dir("walnet_manifest_empty");
  write_text(dir.path() / "vocabulary.txt", "Siren\nMusic\n");
  write_text(dir.path() / "m.csv",
             "clip_id,source_id,start_s,end_s,source_duration_s,labels,audio_path\n");
  const Corpus c = load_manifest(dir.path() / "m.csv");
  EXPECT_TRUE(c.clips.empty());
  EXPECT_EQ(c.vocabulary.size(), 2u);
}

TEST(Manifest, MultiLabelRow) {
  TempDir dir("walnet_manifest_multi");
  write_text(dir.path() / "vocabulary.txt", "Speech\nSiren\nMusic\n");
  write_text(dir.path() / "m.csv",
             "clip_id,source_id,start_s,end_s,source_duration_s,labels,audio_path\n"
             "a,yt1,20,30,300,Siren;Music,a.wav\n"
             "b,yt2,0,10,10,,b.wav\n");
  const Corpus c = load_manifest(dir.path() / "m.csv");
  ASSERT_EQ(c.clips.size(), 2u);
  EXPECT_EQ(c.clips[0].labels, (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(c.clips[1].labels.empty());
  EXPECT_FALSE(c.has_truth());
}

TEST(Manifest, ErrorsCarryRowNumbers) {
  TempDir dir("walnet_manifest_errors");
  write_text(dir.path() / "vocabulary.txt", "Siren\n");
  const std::string header = "clip_id,source_id,start_s,end_s,source_duration_s,labels,audio_path\n";
  auto message = [&](const std::string& body) -> std::string {
    write_text(dir.path() / "m.csv", header + body);
    try {
      load_manifest(dir.path() / "m.csv");
    } catch (const FormatError& e) {
      return e.what();
    }
    return "";
  };
  const std::string bad_span = message("a,s,0,10,300,Siren,x.wav\nb,s,30,30,300,Siren,x.wav\n");
  EXPECT_NE(bad_span.find(":3:"), std::string::npos) << bad_span;
  const std::string unknown = message("a,s,0,10,300,Dog,x.wav\n");
  EXPECT_NE(unknown.find("Dog"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find(":2:"), std::string::npos) << unknown;
  const std::string dup = message("a,s,0,10,300,Siren,x.wav\na,s,0,10,300,,x.wav\n");
  EXPECT_NE(dup.find("duplicate"), std::string::npos) << dup;
}

TEST(Manifest, RoundTripWithTruthSidecar) {
  TempDir dir("walnet_manifest_roundtrip");
  Corpus c = synthesize_corpus(small_spec(12));
  write_manifest(dir.path() / "all.csv", c);
  EXPECT_TRUE(fs::exists(truth_path_for(dir.path() / "all.csv")));
  EXPECT_TRUE(fs::exists(vocabulary_path_for(dir.path() / "all.csv")));
  const Corpus back = load_manifest(dir.path() / "all.csv");
  ASSERT_EQ(back.clips.size(), c.clips.size());
  EXPECT_EQ(back.vocabulary, c.vocabulary);
  for (std::size_t i = 0; i < c.clips.size(); ++i) {
    EXPECT_EQ(back.clips[i].clip_id, c.clips[i].clip_id);
    EXPECT_EQ(back.clips[i].labels, c.clips[i].labels);
    EXPECT_EQ(back.clips[i].audio_path, c.clips[i].audio_path);
    EXPECT_EQ(back.clips[i].span.start_s, c.clips[i].span.start_s);
    ASSERT_TRUE(back.clips[i].truth.has_value());
    EXPECT_EQ(*back.clips[i].truth, *c.clips[i].truth);
  }
}

TEST(Synth, DeterministicFromSeed) {
  const Corpus a = synthesize_corpus(small_spec());
  const Corpus b = synthesize_corpus(small_spec());
  ASSERT_EQ(a.clips.size(), 60u);
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    EXPECT_EQ(a.clips[i].audio_path, b.clips[i].audio_path);
    EXPECT_EQ(a.clips[i].labels, b.clips[i].labels);
  }
  SynthSpec other = small_spec();
  other.seed = 8;
  EXPECT_NE(synthesize_corpus(other).clips[0].audio_path, a.clips[0].audio_path);
}

TEST(Synth, LabelsAreThePlantedEvents) {
  const SynthSpec spec = small_spec();
  const Corpus c = synthesize_corpus(spec);
  for (std::size_t i = 0; i < c.clips.size(); ++i) {
    const SynthSource src = plan_source(spec, i);
    std::set<std::size_t> planted;
    for (const auto& e : src.events) planted.insert(e.event);
    EXPECT_EQ(std::vector<std::size_t>(planted.begin(), planted.end()), c.clips[i].labels);
    EXPECT_EQ(decode_recipe(c.clips[i].audio_path).events.size(), src.events.size());
  }
}

TEST(Synth, DensityEqualsPlantedDuration) {
  const SynthSpec spec = small_spec();
  const Corpus c = synthesize_corpus(spec);
  for (std::size_t i = 0; i < c.clips.size(); ++i) {
    std::map<std::size_t, double> planted;
    for (const auto& e : plan_source(spec, i).events) planted[e.event] += e.duration_s;
    for (const auto& [event, seconds] : planted) {
      EXPECT_NEAR(label_density(c.clips[i], event), seconds / spec.clip_length_s, 1e-9);
    }
  }
}

TEST(Synth, RecipeRoundTrip) {
  const SynthSpec spec = small_spec(5);
  for (std::size_t i = 0; i < 5; ++i) {
    const SynthSource src = plan_source(spec, i);
    const std::string recipe = encode_recipe(src);
    EXPECT_TRUE(is_recipe(recipe));
    EXPECT_EQ(encode_recipe(decode_recipe(recipe)), recipe);
  }
  EXPECT_THROW(decode_recipe("synth:v1/seed=x"), FormatError);
  EXPECT_THROW(decode_recipe("clip.wav"), FormatError);
}

TEST(Synth, RenderIsConsistentAcrossWindows) {
  const SynthSource src = plan_source(small_spec(3), 1);
  const dsp::Waveform wide = render(src, src.clip_start_s - 2.0, src.clip_end_s + 2.0);
  const dsp::Waveform narrow = render(src, src.clip_start_s, src.clip_end_s);
  const auto offset = static_cast<std::size_t>(std::llround(2.0 * dsp::kSampleRate));
  ASSERT_EQ(narrow.samples.size(), static_cast<std::size_t>(10 * dsp::kSampleRate));
  for (std::size_t i = 0; i < narrow.samples.size(); i += 997) {
    ASSERT_EQ(narrow.samples[i], wide.samples[i + offset]) << i;
  }
}

TEST(Synth, SpecValidation) {
  SynthSpec s = small_spec();
  s.max_event_s = 12.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = small_spec();
  s.events_per_clip = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(Synth, TemplatesAreDistinctPerClass) {
  std::set<std::string> names;
  for (std::size_t e = 0; e < 8; ++e) names.insert(event_name(e, 8));
  EXPECT_EQ(names.size(), 8u);
  for (std::size_t e = 1; e < 8; ++e) {
    EXPECT_GT(center_frequency_hz(e, 8), center_frequency_hz(e - 1, 8));
  }
}

TEST(LabelDensity, Examples) {
  WeakClip c = make_clip("a", 0, 10, 10, {0, 1, 2});
  c.truth = std::vector<TruthInterval>{{0, 4.0, 5.0}, {1, 0.0, 10.0}, {2, 0.0, 2.0}, {2, 1.0, 3.0}};
  EXPECT_NEAR(label_density(c, 0), 0.1, 1e-12);
  EXPECT_NEAR(label_density(c, 1), 1.0, 1e-12);
  EXPECT_NEAR(label_density(c, 2), 0.3, 1e-12);
  Corpus corpus;
  corpus.vocabulary = EventVocabulary({"x", "y", "z"});
  corpus.clips.push_back(c);
  for (const auto& d : density_report(corpus)) {
    EXPECT_EQ(d.ld + d.ldn, 1.0);
    if (d.event == 0) EXPECT_NEAR(d.ldn, 0.9, 1e-12);
  }
}

TEST(LabelDensity, RequiresTruth) {
  try {
    label_density(make_clip("a", 0, 10, 10, {0}), 0);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("density requires ground truth"), std::string::npos);
  }
}

Corpus one_clip(double s, double e, double dur) {
  Corpus c;
  c.vocabulary = EventVocabulary({"x"});
  c.clips.push_back(make_clip("a", s, e, dur, {0}));
  return c;
}

TEST(Expand, Examples) {
  auto span = [](double s, double e, double dur) {
    return expand_spans(one_clip(s, e, dur), 30.0).clips[0].span;
  };
  EXPECT_EQ(span(20, 30, 300).start_s, 10.0);
  EXPECT_EQ(span(20, 30, 300).end_s, 40.0);
  EXPECT_EQ(span(5, 15, 300).start_s, 0.0);
  EXPECT_EQ(span(5, 15, 300).end_s, 25.0);
  EXPECT_EQ(span(0, 10, 25).start_s, 0.0);
  EXPECT_EQ(span(0, 10, 25).end_s, 25.0);
  EXPECT_EQ(expand_spans(one_clip(20, 30, 300), 60.0).clips[0].span.start_s, 0.0);
  EXPECT_EQ(expand_spans(one_clip(40, 50, 300), 60.0).clips[0].span.end_s, 75.0);
}

TEST(Expand, LabelsKeptSpansGrowDensityDrops) {
  const Corpus c = synthesize_corpus(small_spec());
  for (double target : {30.0, 60.0}) {
    const Corpus x = expand_spans(c, target);
    ASSERT_TRUE(same_labels(c, x));
    for (std::size_t i = 0; i < c.clips.size(); ++i) {
      const auto& a = c.clips[i];
      const auto& b = x.clips[i];
      EXPECT_LE(b.span.start_s, a.span.start_s);
      EXPECT_GE(b.span.end_s, a.span.end_s);
      EXPECT_NEAR(b.span.length(), target, 1e-9);
      const double shift = a.span.start_s - b.span.start_s;
      ASSERT_EQ(b.truth->size(), a.truth->size());
      for (std::size_t j = 0; j < a.truth->size(); ++j) {
        EXPECT_NEAR((*b.truth)[j].start_s, (*a.truth)[j].start_s + shift, 1e-9);
      }
      for (auto e : a.labels) EXPECT_LE(label_density(b, e), label_density(a, e) + 1e-12);
    }
  }
}

TEST(Corrupt, ZeroRateIsIdentity) {
  const Corpus c = synthesize_corpus(small_spec());
  const auto r = corrupt_labels(c, 0.0, 3);
  EXPECT_TRUE(same_labels(c, r.corpus));
  EXPECT_EQ(r.plan.flip_count(), 0u);
}

TEST(Corrupt, FortyPositivesAtTenPercent) {
  const Corpus c = labeled_corpus(100, 2, [](std::size_t i, std::size_t e) {
    return e == 0 ? i < 40 : i % 3 == 0;
  });
  const auto r = corrupt_labels(c, 10.0, 5);
  ASSERT_EQ(r.plan.events[0], "ev0");
  EXPECT_EQ(r.plan.flips[0].demoted.size(), 2u);
  EXPECT_EQ(r.plan.flips[0].promoted.size(), 2u);
  EXPECT_EQ(r.corpus.positive_counts()[0], 40u);
}

TEST(Corrupt, PreservesCountsAndReplaysFromPlan) {
  const Corpus c = synthesize_corpus(small_spec(200));
  for (double rate : {10.0, 30.0, 50.0, 90.0}) {
    const auto r = corrupt_labels(c, rate, 11);
    EXPECT_EQ(r.corpus.positive_counts(), c.positive_counts());
    const auto before = c.positive_counts();
    for (std::size_t e = 0; e < before.size(); ++e) {
      const auto k = static_cast<std::size_t>(std::llround(rate / 100.0 * before[e] / 2.0));
      EXPECT_EQ(r.plan.flips[e].demoted.size(), k);
      EXPECT_EQ(r.plan.flips[e].promoted.size(), k);
    }
    const auto parsed = CorruptionPlan::parse(r.plan.to_text(), "plan");
    EXPECT_EQ(parsed.to_text(), r.plan.to_text());
    EXPECT_TRUE(same_labels(apply_plan(c, parsed), r.corpus));
    EXPECT_TRUE(same_labels(corrupt_labels(c, rate, 11).corpus, r.corpus));
  }
}

TEST(Corrupt, FlipsOnlyTheirOwnEvent) {
  const Corpus c = synthesize_corpus(small_spec(200));
  const auto r = corrupt_labels(c, 40.0, 2);
  for (std::size_t i = 0; i < c.clips.size(); ++i) {
    for (std::size_t e = 0; e < c.vocabulary.size(); ++e) {
      const bool changed = c.clips[i].has_label(e) != r.corpus.clips[i].has_label(e);
      const auto& f = r.plan.flips[e];
      const bool listed =
          std::count(f.demoted.begin(), f.demoted.end(), c.clips[i].clip_id) +
              std::count(f.promoted.begin(), f.promoted.end(), c.clips[i].clip_id) > 0;
      EXPECT_EQ(changed, listed);
    }
  }
}

TEST(Corrupt, ErrorsAreNamed) {
  const Corpus c = labeled_corpus(10, 2, [](std::size_t i, std::size_t e) {
    return e == 0 ? true : i < 2;
  });
  try {
    corrupt_labels(c, 100.0, 1);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("ev0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(corrupt_labels(c, 101.0, 1), InvalidArgument);
  EXPECT_THROW(corrupt_labels(c, -1.0, 1), InvalidArgument);
}

// Clips c1000.. with truth: clip i contains event e when has(i, e).
Corpus truth_corpus(std::size_t n, std::size_t events,
                    const std::function<bool(std::size_t, std::size_t)>& has) {
  Corpus c = labeled_corpus(n, events, has);
  for (auto& clip : c.clips) {
    std::vector<TruthInterval> t;
    for (auto e : clip.labels) t.push_back({e, 1.0, 2.0});
    clip.truth = t;
  }
  return c;
}

TEST(Wild, PerfectRetrievalReproducesTruth) {
  const Corpus c = truth_corpus(12, 3, [](std::size_t i, std::size_t e) { return (i + e) % 3 == 0 || i % 4 == e; });
  // Every event appears in the same number of clips here.
  const auto counts = c.positive_counts();
  ASSERT_EQ(counts[0], counts[1]);
  ASSERT_EQ(counts[1], counts[2]);
  const Corpus w = simulate_wild(c, 1.0, counts[0], 3);
  EXPECT_TRUE(same_labels(c, w));
}

TEST(Wild, PrecisionSixtyOfFifty) {
  const Corpus c = truth_corpus(200, 3, [](std::size_t i, std::size_t e) { return (i * 7 + e * 13) % 4 == 0; });
  const Corpus w = simulate_wild(c, 0.6, 50, 9);
  for (std::size_t e = 0; e < 3; ++e) {
    std::size_t tp = 0, fp = 0;
    for (const auto& clip : w.clips) {
      if (!clip.has_label(e)) continue;
      (clip.contains_event(e) ? tp : fp) += 1;
    }
    EXPECT_EQ(tp, 30u);
    EXPECT_EQ(fp, 20u);
  }
  EXPECT_EQ(simulate_wild(c, 0.6, 50, 9).clips.size(), w.clips.size());
  EXPECT_THROW(simulate_wild(c, 0.6, 500, 9), InvalidArgument);
}

TEST(Wild, CoOccurringEventBecomesFalseNegative) {
  // Clip 0 holds A and B, clip 1 holds B. With top_k 1, B is retrieved from
  // one of the two; whenever that is clip 1, clip 0 keeps only A.
  Corpus c = truth_corpus(3, 2, [](std::size_t i, std::size_t e) { return e == 0 ? i == 0 : i <= 1; });
  std::size_t cases = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Corpus w = simulate_wild(c, 1.0, 1, seed);
    const WeakClip* first = w.find("c1000");
    ASSERT_NE(first, nullptr);
    if (first->has_label(1)) continue;
    ++cases;
    EXPECT_EQ(first->labels, (std::vector<std::size_t>{0}));
    EXPECT_TRUE(first->contains_event(1));
  }
  EXPECT_GT(cases, 0u);
}

TEST(Split, PartitionIsDisjointAndDeterministic) {
  const Corpus c = synthesize_corpus(small_spec(50));
  const auto s = split_corpus(c, {}, 7);
  EXPECT_EQ(s.train.clips.size(), 35u);
  EXPECT_EQ(s.val.clips.size(), 5u);
  EXPECT_EQ(s.eval.clips.size(), 10u);
  std::set<std::string> ids;
  for (const Corpus* part : {&s.train, &s.val, &s.eval}) {
    for (const auto& clip : part->clips) EXPECT_TRUE(ids.insert(clip.clip_id).second);
  }
  EXPECT_EQ(ids.size(), 50u);
  EXPECT_TRUE(same_labels(split_corpus(c, {}, 7).eval, s.eval));
}

TEST(Features, CacheNamesTrackTheSpan) {
  const Corpus c = synthesize_corpus(small_spec(2));
  const Corpus x = expand_spans(c, 30.0);
  EXPECT_NE(feature_cache_name(c.clips[0]), feature_cache_name(x.clips[0]));
  EXPECT_EQ(feature_cache_name(c.clips[0]), feature_cache_name(synthesize_corpus(small_spec(2)).clips[0]));
  EXPECT_TRUE(feature_cache_name(c.clips[0]).starts_with("clip00000-"));
}

TEST(Features, ParallelAndCachedMatchSerial) {
  TempDir dir("walnet_feature_cache");
  const Corpus c = synthesize_corpus(small_spec(3));
  const auto serial = corpus_features(c, {}, 1);
  const auto parallel = corpus_features(c, dir.path(), 3);
  const auto cached = corpus_features(c, dir.path(), 1);
  ASSERT_EQ(serial.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(serial[i].frames, 860u);
    EXPECT_EQ(serial[i].values, parallel[i].values);
    EXPECT_EQ(serial[i].values, cached[i].values);
  }
}

TEST(Features, WavSourceIsSliced) {
  TempDir dir("walnet_wav_source");
  dsp::Waveform w;
  w.samples.resize(3 * dsp::kSampleRate);
  for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = static_cast<float>(i % 100) / 200.0f;
  dsp::write_wav(dir.path() / "src.wav", w);
  WeakClip clip = make_clip("a", 1.0, 2.0, 3.0);
  clip.audio_path = "src.wav";
  const dsp::Waveform cut = clip_audio(clip, dir.path());
  ASSERT_EQ(cut.samples.size(), static_cast<std::size_t>(dsp::kSampleRate));
  EXPECT_NEAR(cut.samples[5], w.samples[dsp::kSampleRate + 5], 1e-4);
  clip.span.end_s = 4.0;
  clip.span.source_duration_s = 5.0;
  EXPECT_THROW(clip_audio(clip, dir.path()), InvalidArgument);
}

}  // namespace
}  // namespace walnet::data
