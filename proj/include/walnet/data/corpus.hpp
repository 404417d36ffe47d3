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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace walnet::data {

// Ordered, unique event names. The index of a name is its class index.
class EventVocabulary {
 public:
  EventVocabulary() = default;
  explicit EventVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::optional<std::size_t> find(const std::string& name) const;

  // One name per line; blank lines are skipped.
  static EventVocabulary read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  bool operator==(const EventVocabulary&) const = default;

 private:
  std::vector<std::string> names_;
};

struct SourceSpan {
  std::string source_id;
  double start_s = 0.0;
  double end_s = 0.0;
  double source_duration_s = 0.0;

  double length() const { return end_s - start_s; }
  void validate() const;
};

// Event occurrence in clip-relative seconds.
struct TruthInterval {
  std::size_t event = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const TruthInterval&) const = default;
};

struct WeakClip {
  std::string clip_id;
  SourceSpan span;
  std::vector<std::size_t> labels;  // sorted, unique
  // A file path (relative paths resolve against Corpus::base_dir) or a
  // synthetic source recipe starting with "synth:".
  std::string audio_path;
  std::optional<std::vector<TruthInterval>> truth;

  bool has_label(std::size_t event) const;
  // Truth intervals of one event, in stored order.
  std::vector<TruthInterval> intervals_of(std::size_t event) const;
  bool contains_event(std::size_t event) const;
};

struct Corpus {
  EventVocabulary vocabulary;
  std::vector<WeakClip> clips;
  std::string split;              // "train", "val", "eval" or empty
  std::filesystem::path base_dir;  // where relative audio paths resolve

  // Unique clip ids, labels inside the vocabulary, sorted label lists, truth
  // intervals inside [0, clip length].
  void validate() const;
  bool has_truth() const;
  std::vector<std::size_t> positive_counts() const;
  const WeakClip* find(const std::string& clip_id) const;
};

// Sibling files of a manifest: vocabulary.txt in the same directory and
// <stem>.truth.csv next to the manifest.
std::filesystem::path vocabulary_path_for(const std::filesystem::path& manifest);
std::filesystem::path truth_path_for(const std::filesystem::path& manifest);

inline constexpr const char* kManifestHeader[] = {"clip_id", "start_s", "end_s"};

// Reads the manifest, resolves labels against the vocabulary (default: the
// sibling vocabulary.txt) and attaches the truth sidecar when present. With a
// sidecar, every clip carries truth (clips without rows have none planted).
Corpus load_manifest(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& vocabulary = std::nullopt);

// Writes the manifest, the sibling vocabulary.txt and, if the corpus has
// truth, the sidecar. Relative audio paths are rebased onto the new
// directory.
void write_manifest(const std::filesystem::path& path, const Corpus& corpus);

// Union length of the event's truth intervals divided by the clip length.
double label_density(const WeakClip& clip, std::size_t event);

struct DensityEntry {
  std::string clip_id;
  std::size_t event = 0;
  double ld = 0.0;
  double ldn = 1.0;
};

// One entry per (clip, labeled event).
std::vector<DensityEntry> density_report(const Corpus& corpus);
void write_density_report(const std::filesystem::path& path, const Corpus& corpus,
                          const std::vector<DensityEntry>& entries);

struct SplitFractions {
  double train = 0.7;
  double val = 0.1;
};

struct CorpusSplits {
  Corpus train;
  Corpus val;
  Corpus eval;
};

// Seeded partition; each part keeps the input's clip order.
CorpusSplits split_corpus(const Corpus& corpus, const SplitFractions& fractions,
                          std::uint64_t seed);

}  // namespace walnet::data
