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

#include "walnet/data/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "walnet/util/csv.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"
#include "walnet/util/keyed_text.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::data {
namespace {

const csv::Row kManifestColumns = {"clip_id",           "source_id", "start_s", "end_s",
                                   "source_duration_s", "labels",    "audio_path"};
const csv::Row kTruthColumns = {"clip_id", "event", "start_s", "end_s"};

double parse_seconds(const std::string& text, const std::string& what, const std::string& origin,
                     std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(v)) {
    throw FormatError(fmt::format("{}:{}: {} '{}' is not a number", origin, line, what, text));
  }
  return v;
}

void check_header(const csv::Record& rec, const csv::Row& expected, const std::string& origin) {
  if (rec.fields != expected) {
    throw FormatError(fmt::format("{}:{}: expected header '{}'", origin, rec.line,
                                  csv::format_row(expected)));
  }
}

}  // namespace

EventVocabulary::EventVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidArgument("event vocabulary is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InvalidArgument("event vocabulary contains an empty name");
    if (!seen.insert(n).second) throw InvalidArgument("duplicate event name '" + n + "'");
  }
}

std::optional<std::size_t> EventVocabulary::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

EventVocabulary EventVocabulary::read(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto name = std::string(trim(line));
    if (!name.empty()) names.push_back(std::move(name));
  }
  try {
    return EventVocabulary(std::move(names));
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void EventVocabulary::write(const std::filesystem::path& path) const {
  std::string text;
  for (const auto& n : names_) text += n + "\n";
  write_file(path, text);
}

void SourceSpan::validate() const {
  if (!(start_s >= 0.0 && start_s < end_s && end_s <= source_duration_s)) {
    throw InvalidArgument(fmt::format("span of source '{}' violates 0 <= S < E <= duration: "
                                      "S={} E={} duration={}",
                                      source_id, start_s, end_s, source_duration_s));
  }
}

bool WeakClip::has_label(std::size_t event) const {
  return std::binary_search(labels.begin(), labels.end(), event);
}

std::vector<TruthInterval> WeakClip::intervals_of(std::size_t event) const {
  if (!truth) throw InvalidArgument("clip '" + clip_id + "' has no ground truth");
  std::vector<TruthInterval> out;
  for (const auto& t : *truth) {
    if (t.event == event) out.push_back(t);
  }
  return out;
}

bool WeakClip::contains_event(std::size_t event) const {
  if (!truth) throw InvalidArgument("clip '" + clip_id + "' has no ground truth");
  return std::any_of(truth->begin(), truth->end(),
                     [event](const TruthInterval& t) { return t.event == event; });
}

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& clip : clips) {
    if (clip.clip_id.empty()) throw InvalidArgument("empty clip_id");
    if (!ids.insert(clip.clip_id).second) {
      throw InvalidArgument("duplicate clip_id '" + clip.clip_id + "'");
    }
    clip.span.validate();
    if (!std::is_sorted(clip.labels.begin(), clip.labels.end()) ||
        std::adjacent_find(clip.labels.begin(), clip.labels.end()) != clip.labels.end()) {
      throw InvalidArgument("clip '" + clip.clip_id + "' labels are not sorted and unique");
    }
    for (auto e : clip.labels) {
      if (e >= vocabulary.size()) {
        throw InvalidArgument(fmt::format("clip '{}' label {} outside the vocabulary of {}",
                                          clip.clip_id, e, vocabulary.size()));
      }
    }
    if (clip.truth) {
      const double len = clip.span.length();
      for (const auto& t : *clip.truth) {
        if (t.event >= vocabulary.size() || !(t.start_s >= 0.0 && t.start_s < t.end_s) ||
            t.end_s > len + 1e-9) {
          throw InvalidArgument(fmt::format("clip '{}' truth interval [{}, {}] for event {} is "
                                            "outside [0, {}]",
                                            clip.clip_id, t.start_s, t.end_s, t.event, len));
        }
      }
    }
  }
}

bool Corpus::has_truth() const {
  return !clips.empty() &&
         std::all_of(clips.begin(), clips.end(), [](const WeakClip& c) { return c.truth.has_value(); });
}

std::vector<std::size_t> Corpus::positive_counts() const {
  std::vector<std::size_t> counts(vocabulary.size(), 0);
  for (const auto& clip : clips) {
    for (auto e : clip.labels) ++counts.at(e);
  }
  return counts;
}

const WeakClip* Corpus::find(const std::string& clip_id) const {
  for (const auto& c : clips) {
    if (c.clip_id == clip_id) return &c;
  }
  return nullptr;
}

std::filesystem::path vocabulary_path_for(const std::filesystem::path& manifest) {
  return manifest.parent_path() / "vocabulary.txt";
}

std::filesystem::path truth_path_for(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".truth.csv");
  return p;
}

Corpus load_manifest(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& vocabulary) {
  const std::string origin = path.string();
  Corpus corpus;
  corpus.vocabulary = EventVocabulary::read(vocabulary.value_or(vocabulary_path_for(path)));
  corpus.base_dir = path.parent_path();

  const auto records = csv::read(path);
  if (records.empty()) throw FormatError(origin + ": missing header");
  check_header(records.front(), kManifestColumns, origin);

  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto& f = rec.fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != kManifestColumns.size()) {
      throw FormatError(fmt::format("{}:{}: expected {} fields, got {}", origin, rec.line,
                                    kManifestColumns.size(), f.size()));
    }
    WeakClip clip;
    clip.clip_id = f[0];
    clip.span.source_id = f[1];
    clip.span.start_s = parse_seconds(f[2], "start_s", origin, rec.line);
    clip.span.end_s = parse_seconds(f[3], "end_s", origin, rec.line);
    clip.span.source_duration_s = parse_seconds(f[4], "source_duration_s", origin, rec.line);
    if (clip.clip_id.empty()) throw FormatError(fmt::format("{}:{}: empty clip_id", origin, rec.line));
    try {
      clip.span.validate();
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("{}:{}: {}", origin, rec.line, e.what()));
    }
    if (!f[5].empty()) {
      for (const auto& part : split(f[5], ';')) {
        const auto name = std::string(trim(part));
        auto id = corpus.vocabulary.find(name);
        if (!id) {
          throw FormatError(
              fmt::format("{}:{}: unknown event name '{}'", origin, rec.line, name));
        }
        clip.labels.push_back(*id);
      }
    }
    std::sort(clip.labels.begin(), clip.labels.end());
    clip.labels.erase(std::unique(clip.labels.begin(), clip.labels.end()), clip.labels.end());
    clip.audio_path = f[6];
    if (!index.emplace(clip.clip_id, corpus.clips.size()).second) {
      throw FormatError(
          fmt::format("{}:{}: duplicate clip_id '{}'", origin, rec.line, clip.clip_id));
    }
    corpus.clips.push_back(std::move(clip));
  }

  const auto truth_path = truth_path_for(path);
  if (std::filesystem::exists(truth_path)) {
    for (auto& clip : corpus.clips) clip.truth.emplace();
    const auto truth = csv::read(truth_path);
    const std::string torigin = truth_path.string();
    if (truth.empty()) throw FormatError(torigin + ": missing header");
    check_header(truth.front(), kTruthColumns, torigin);
    for (std::size_t r = 1; r < truth.size(); ++r) {
      const auto& rec = truth[r];
      const auto& f = rec.fields;
      if (f.size() == 1 && f[0].empty()) continue;
      if (f.size() != kTruthColumns.size()) {
        throw FormatError(fmt::format("{}:{}: expected {} fields", torigin, rec.line,
                                      kTruthColumns.size()));
      }
      auto it = index.find(f[0]);
      if (it == index.end()) continue;  // sidecars may cover a superset of clips
      auto id = corpus.vocabulary.find(f[1]);
      if (!id) {
        throw FormatError(fmt::format("{}:{}: unknown event name '{}'", torigin, rec.line, f[1]));
      }
      corpus.clips[it->second].truth->push_back(
          {*id, parse_seconds(f[2], "start_s", torigin, rec.line),
           parse_seconds(f[3], "end_s", torigin, rec.line)});
    }
  }
  try {
    corpus.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(origin + ": " + e.what());
  }
  return corpus;
}

void write_manifest(const std::filesystem::path& path, const Corpus& corpus) {
  corpus.validate();
  const auto dir = std::filesystem::absolute(path).parent_path();
  std::vector<csv::Row> rows;
  for (const auto& clip : corpus.clips) {
    std::vector<std::string> names;
    for (auto e : clip.labels) names.push_back(corpus.vocabulary.name(e));
    std::string audio = clip.audio_path;
    if (!audio.empty() && !corpus.base_dir.empty() && !audio.starts_with("synth:") &&
        std::filesystem::path(audio).is_relative()) {
      const auto abs = (std::filesystem::absolute(corpus.base_dir) / audio).lexically_normal();
      audio = abs.lexically_relative(dir).generic_string();
    }
    rows.push_back({clip.clip_id, clip.span.source_id, format_double(clip.span.start_s),
                    format_double(clip.span.end_s), format_double(clip.span.source_duration_s),
                    join(names, ";"), audio});
  }
  csv::write(path, kManifestColumns, rows);
  corpus.vocabulary.write(vocabulary_path_for(path));

  if (corpus.has_truth()) {
    std::vector<csv::Row> truth_rows;
    for (const auto& clip : corpus.clips) {
      for (const auto& t : *clip.truth) {
        truth_rows.push_back({clip.clip_id, corpus.vocabulary.name(t.event),
                              format_double(t.start_s), format_double(t.end_s)});
      }
    }
    csv::write(truth_path_for(path), kTruthColumns, truth_rows);
  } else if (std::filesystem::exists(truth_path_for(path))) {
    std::filesystem::remove(truth_path_for(path));
  }
}

double label_density(const WeakClip& clip, std::size_t event) {
  if (!clip.truth) {
    throw InvalidArgument("density requires ground truth (clip '" + clip.clip_id + "')");
  }
  auto intervals = clip.intervals_of(event);
  std::sort(intervals.begin(), intervals.end(),
            [](const TruthInterval& a, const TruthInterval& b) { return a.start_s < b.start_s; });
  double covered = 0.0;
  double run_start = 0.0, run_end = -1.0;
  bool open = false;
  for (const auto& t : intervals) {
    if (open && t.start_s <= run_end) {
      run_end = std::max(run_end, t.end_s);
      continue;
    }
    if (open) covered += run_end - run_start;
    run_start = t.start_s;
    run_end = t.end_s;
    open = true;
  }
  if (open) covered += run_end - run_start;
  return std::clamp(covered / clip.span.length(), 0.0, 1.0);
}

std::vector<DensityEntry> density_report(const Corpus& corpus) {
  std::vector<DensityEntry> out;
  for (const auto& clip : corpus.clips) {
    for (auto e : clip.labels) {
      const double ld = label_density(clip, e);
      out.push_back({clip.clip_id, e, ld, 1.0 - ld});
    }
  }
  return out;
}

void write_density_report(const std::filesystem::path& path, const Corpus& corpus,
                          const std::vector<DensityEntry>& entries) {
  std::vector<csv::Row> rows;
  for (const auto& d : entries) {
    rows.push_back({d.clip_id, corpus.vocabulary.name(d.event), format_double(d.ld),
                    format_double(d.ldn)});
  }
  csv::write(path, {"clip_id", "event", "ld", "ldn"}, rows);
}

CorpusSplits split_corpus(const Corpus& corpus, const SplitFractions& fractions,
                          std::uint64_t seed) {
  if (!(fractions.train >= 0 && fractions.val >= 0 && fractions.train + fractions.val <= 1.0)) {
    throw InvalidArgument("split fractions must be non-negative and sum to at most 1");
  }
  const std::size_t n = corpus.clips.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(n)));
  const auto n_val = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(fractions.val * static_cast<double>(n))));
  std::vector<int> part(n, 2);
  for (std::size_t i = 0; i < n_train; ++i) part[order[i]] = 0;
  for (std::size_t i = n_train; i < n_train + n_val; ++i) part[order[i]] = 1;

  CorpusSplits out;
  Corpus* dest[] = {&out.train, &out.val, &out.eval};
  const char* names[] = {"train", "val", "eval"};
  for (int p = 0; p < 3; ++p) {
    dest[p]->vocabulary = corpus.vocabulary;
    dest[p]->base_dir = corpus.base_dir;
    dest[p]->split = names[p];
  }
  for (std::size_t i = 0; i < n; ++i) dest[part[i]]->clips.push_back(corpus.clips[i]);
  return out;
}

}  // namespace walnet::data
