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

#include "walnet/data/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"
#include "walnet/util/keyed_text.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::data {
namespace {

// Uniform k-subset of items (partial Fisher-Yates), returned in input order.
std::vector<std::size_t> choose(std::vector<std::size_t> items, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace

Corpus expand_spans(const Corpus& corpus, double target_len_s) {
  if (!(target_len_s > 0)) throw InvalidArgument("expand: target length must be positive");
  Corpus out = corpus;
  for (auto& clip : out.clips) {
    auto& span = clip.span;
    const double length = span.length();
    if (length >= target_len_s) continue;
    const double old_start = span.start_s;
    if (span.source_duration_s <= target_len_s) {
      span.start_s = 0.0;
      span.end_s = span.source_duration_s;
    } else {
      const double pad = (target_len_s - length) / 2.0;
      span.start_s = std::max(0.0, span.start_s - pad);
      span.end_s = std::min(span.source_duration_s, span.end_s + pad);
    }
    if (clip.truth) {
      const double shift = old_start - span.start_s;
      for (auto& t : *clip.truth) {
        t.start_s += shift;
        t.end_s += shift;
      }
    }
  }
  return out;
}

std::size_t CorruptionPlan::flip_count() const {
  std::size_t n = 0;
  for (const auto& f : flips) n += f.demoted.size() + f.promoted.size();
  return n;
}

std::string CorruptionPlan::to_text() const {
  KeyedText doc;
  doc.set("rate", rate);
  doc.set("seed", seed);
  doc.set("events", static_cast<std::uint64_t>(events.size()));
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto prefix = fmt::format("event.{}.", e);
    doc.set(prefix + "name", events[e]);
    doc.set(prefix + "demoted", join(flips[e].demoted, ";"));
    doc.set(prefix + "promoted", join(flips[e].promoted, ";"));
  }
  return doc.to_string();
}

CorruptionPlan CorruptionPlan::parse(const std::string& text, const std::string& origin) {
  const auto doc = KeyedText::parse(text, origin);
  CorruptionPlan plan;
  plan.rate = doc.get_double("rate");
  plan.seed = doc.get_uint("seed");
  const auto n = doc.get_uint("events");
  auto ids = [](const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    for (auto& part : split(s, ';')) out.emplace_back(trim(part));
    return out;
  };
  for (std::uint64_t e = 0; e < n; ++e) {
    const auto prefix = fmt::format("event.{}.", e);
    plan.events.push_back(doc.get_string(prefix + "name"));
    plan.flips.push_back({ids(doc.get_string(prefix + "demoted", "")),
                          ids(doc.get_string(prefix + "promoted", ""))});
  }
  return plan;
}

void CorruptionPlan::write(const std::filesystem::path& path) const { write_file(path, to_text()); }

CorruptionPlan CorruptionPlan::read(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

CorruptionPlan plan_corruption(const Corpus& corpus, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 100.0)) {
    throw InvalidArgument(fmt::format("corruption rate must lie in [0, 100], got {}", rate));
  }
  CorruptionPlan plan;
  plan.rate = rate;
  plan.seed = seed;
  const std::size_t events = corpus.vocabulary.size();
  for (std::size_t e = 0; e < events; ++e) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
      (corpus.clips[i].has_label(e) ? pos : neg).push_back(i);
    }
    const auto k = static_cast<std::size_t>(
        std::llround(rate / 100.0 * static_cast<double>(pos.size()) / 2.0));
    if (k > neg.size()) {
      throw InvalidArgument(fmt::format(
          "event '{}' needs {} negatives to promote but only {} clips lack it",
          corpus.vocabulary.name(e), k, neg.size()));
    }
    Rng rng(mix_seed(seed, e));
    EventFlips flips;
    for (auto i : choose(pos, k, rng)) flips.demoted.push_back(corpus.clips[i].clip_id);
    for (auto i : choose(neg, k, rng)) flips.promoted.push_back(corpus.clips[i].clip_id);
    plan.events.push_back(corpus.vocabulary.name(e));
    plan.flips.push_back(std::move(flips));
  }
  return plan;
}

Corpus apply_plan(const Corpus& corpus, const CorruptionPlan& plan) {
  if (plan.events.size() != plan.flips.size()) {
    throw InvalidArgument("corruption plan has mismatched event and flip lists");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) index[corpus.clips[i].clip_id] = i;

  std::vector<std::set<std::size_t>> labels;
  for (const auto& clip : corpus.clips) labels.emplace_back(clip.labels.begin(), clip.labels.end());

  for (std::size_t p = 0; p < plan.events.size(); ++p) {
    const auto e = corpus.vocabulary.find(plan.events[p]);
    if (!e) throw InvalidArgument("corruption plan names unknown event '" + plan.events[p] + "'");
    auto lookup = [&](const std::string& id) {
      auto it = index.find(id);
      if (it == index.end()) throw InvalidArgument("corruption plan names unknown clip '" + id + "'");
      return it->second;
    };
    for (const auto& id : plan.flips[p].demoted) {
      const auto i = lookup(id);
      if (!corpus.clips[i].has_label(*e)) {
        throw InvalidArgument(fmt::format("plan demotes '{}' for event '{}' but it is not a "
                                          "positive",
                                          id, plan.events[p]));
      }
      labels[i].erase(*e);
    }
    for (const auto& id : plan.flips[p].promoted) {
      const auto i = lookup(id);
      if (corpus.clips[i].has_label(*e)) {
        throw InvalidArgument(fmt::format("plan promotes '{}' for event '{}' but it is already "
                                          "positive",
                                          id, plan.events[p]));
      }
      labels[i].insert(*e);
    }
  }
  Corpus out = corpus;
  for (std::size_t i = 0; i < out.clips.size(); ++i) {
    out.clips[i].labels.assign(labels[i].begin(), labels[i].end());
  }
  return out;
}

CorruptionResult corrupt_labels(const Corpus& corpus, double rate, std::uint64_t seed) {
  auto plan = plan_corruption(corpus, rate, seed);
  auto out = apply_plan(corpus, plan);
  return {std::move(out), std::move(plan)};
}

Corpus simulate_wild(const Corpus& truth_corpus, double retrieval_precision, std::size_t top_k,
                     std::uint64_t seed) {
  if (!(retrieval_precision >= 0.0 && retrieval_precision <= 1.0)) {
    throw InvalidArgument("retrieval precision must lie in [0, 1]");
  }
  if (!truth_corpus.has_truth()) {
    throw InvalidArgument("wild labeling requires ground truth for every clip");
  }
  const std::size_t n = truth_corpus.clips.size();
  const auto n_true = static_cast<std::size_t>(
      std::llround(retrieval_precision * static_cast<double>(top_k)));
  const std::size_t n_false = top_k - n_true;

  std::vector<std::set<std::size_t>> retrieved(n);
  for (std::size_t e = 0; e < truth_corpus.vocabulary.size(); ++e) {
    std::vector<std::size_t> yes, no;
    for (std::size_t i = 0; i < n; ++i) {
      (truth_corpus.clips[i].contains_event(e) ? yes : no).push_back(i);
    }
    if (n_true > yes.size() || n_false > no.size()) {
      throw InvalidArgument(fmt::format(
          "event '{}': top_k={} at precision {} needs {} clips containing it and {} without, "
          "have {} and {}",
          truth_corpus.vocabulary.name(e), top_k, retrieval_precision, n_true, n_false,
          yes.size(), no.size()));
    }
    Rng rng(mix_seed(seed, e));
    for (auto i : choose(yes, n_true, rng)) retrieved[i].insert(e);
    for (auto i : choose(no, n_false, rng)) retrieved[i].insert(e);
  }

  Corpus out;
  out.vocabulary = truth_corpus.vocabulary;
  out.split = truth_corpus.split;
  out.base_dir = truth_corpus.base_dir;
  for (std::size_t i = 0; i < n; ++i) {
    if (retrieved[i].empty()) continue;
    WeakClip clip = truth_corpus.clips[i];
    clip.labels.assign(retrieved[i].begin(), retrieved[i].end());
    out.clips.push_back(std::move(clip));
  }
  return out;
}

}  // namespace walnet::data
