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

#include "walnet/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "walnet/util/error.hpp"
#include "walnet/util/keyed_text.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::data {
namespace {

constexpr double kLowestCenterHz = 400.0;
constexpr double kHighestCenterHz = 6000.0;
constexpr double kRampSeconds = 0.01;
constexpr std::size_t kBandPartials = 24;
constexpr double kPulseSeconds = 0.06;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

const char* template_name(Template t) {
  switch (t) {
    case Template::kTone: return "tone";
    case Template::kChirp: return "chirp";
    case Template::kNoiseBand: return "band";
    case Template::kAmTone: return "am";
    case Template::kPulseTrain: return "pulse";
  }
  return "?";
}

// Counter-based standard normal for sample i of a source.
double background_sample(std::uint64_t seed, std::uint64_t i) {
  const double u1 = 1.0 - to_unit(splitmix64(seed ^ splitmix64(2 * i)));
  const double u2 = to_unit(splitmix64(seed ^ splitmix64(2 * i + 1)));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Instance parameters drawn from the event's own seed.
struct Voice {
  Template kind = Template::kTone;
  double freq = 0.0;
  double phase = 0.0;
  double rate = 0.0;  // AM or pulse rate
  std::vector<double> partial_freq;
  std::vector<double> partial_phase;
};

Voice make_voice(const PlantedEvent& ev, std::size_t event_count) {
  Rng rng(ev.instance_seed);
  Voice v;
  v.kind = template_of(ev.event, event_count);
  v.freq = center_frequency_hz(ev.event, event_count) * uniform(rng, 0.95, 1.05);
  v.phase = uniform(rng, 0.0, kTwoPi);
  if (v.kind == Template::kAmTone) v.rate = uniform(rng, 4.0, 10.0);
  if (v.kind == Template::kPulseTrain) v.rate = uniform(rng, 3.0, 6.0);
  if (v.kind == Template::kNoiseBand) {
    for (std::size_t k = 0; k < kBandPartials; ++k) {
      v.partial_freq.push_back(v.freq * std::pow(1.2, uniform(rng, -1.0, 1.0)));
      v.partial_phase.push_back(uniform(rng, 0.0, kTwoPi));
    }
  }
  return v;
}

// Unit-RMS template value at time tau into an event of length d.
double voice_value(const Voice& v, double tau, double d) {
  switch (v.kind) {
    case Template::kTone: {
      const double a = 1.0 / std::sqrt(0.625);
      return a * (std::sin(kTwoPi * v.freq * tau + v.phase) +
                  0.5 * std::sin(2.0 * (kTwoPi * v.freq * tau + v.phase)));
    }
    case Template::kChirp: {
      const double f0 = v.freq * 0.75;
      const double f1 = v.freq * 1.33;
      return std::sqrt(2.0) *
             std::sin(kTwoPi * (f0 * tau + (f1 - f0) * tau * tau / (2.0 * d)) + v.phase);
    }
    case Template::kNoiseBand: {
      double s = 0.0;
      for (std::size_t k = 0; k < v.partial_freq.size(); ++k) {
        s += std::sin(kTwoPi * v.partial_freq[k] * tau + v.partial_phase[k]);
      }
      return s * std::sqrt(2.0 / static_cast<double>(v.partial_freq.size()));
    }
    case Template::kAmTone: {
      constexpr double m = 0.9;
      const double a = std::sqrt(2.0 / (1.0 + m * m / 2.0));
      return a * (1.0 + m * std::sin(kTwoPi * v.rate * tau)) *
             std::sin(kTwoPi * v.freq * tau + v.phase);
    }
    case Template::kPulseTrain: {
      const double period = 1.0 / v.rate;
      const double duty = kPulseSeconds / period;
      if (std::fmod(tau, period) >= kPulseSeconds) return 0.0;
      return std::sqrt(2.0 / duty) * std::sin(kTwoPi * v.freq * tau + v.phase);
    }
  }
  return 0.0;
}

double ramp(double tau, double d) {
  const double edge = std::min({tau, d - tau, kRampSeconds});
  if (edge >= kRampSeconds) return 1.0;
  if (edge <= 0.0) return 0.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kRampSeconds);
}

double parse_number(const std::string& text, const std::string& recipe) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw FormatError("bad number in recipe: " + recipe);
  return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& recipe) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw FormatError("bad integer in recipe: " + recipe);
  return v;
}

}  // namespace

void SynthSpec::validate() const {
  if (event_count < 1) throw InvalidArgument("synth: event count must be at least 1");
  if (!(clip_length_s > 0)) throw InvalidArgument("synth: clip length must be positive");
  if (events_per_clip.empty()) throw InvalidArgument("synth: events-per-clip weights are empty");
  double total = 0.0;
  for (double w : events_per_clip) {
    if (!(w >= 0)) throw InvalidArgument("synth: events-per-clip weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw InvalidArgument("synth: events-per-clip weights sum to zero");
  if (events_per_clip.size() - 1 > event_count) {
    throw InvalidArgument("synth: events-per-clip allows more events than classes");
  }
  if (!(min_event_s > 0 && min_event_s <= max_event_s)) {
    throw InvalidArgument("synth: event duration range must satisfy 0 < min <= max");
  }
  if (max_event_s > clip_length_s) {
    throw InvalidArgument(fmt::format("synth: event duration {} s exceeds clip length {} s",
                                      max_event_s, clip_length_s));
  }
  if (!(min_snr_db <= max_snr_db)) throw InvalidArgument("synth: SNR range is inverted");
  if (!(placement_margin_s >= 0 &&
        source_duration_s >= clip_length_s + 2.0 * placement_margin_s)) {
    throw InvalidArgument("synth: source duration must hold the clip plus both margins");
  }
  if (!(noise_rms > 0)) throw InvalidArgument("synth: noise level must be positive");
}

Template template_of(std::size_t event, std::size_t /*event_count*/) {
  return static_cast<Template>(event % 5);
}

double center_frequency_hz(std::size_t event, std::size_t event_count) {
  const double lo = dsp::hz_to_mel(kLowestCenterHz);
  const double hi = dsp::hz_to_mel(kHighestCenterHz);
  const double t = event_count == 1 ? 0.5
                                    : static_cast<double>(event) /
                                          static_cast<double>(event_count - 1);
  return dsp::mel_to_hz(lo + t * (hi - lo));
}

std::string event_name(std::size_t event, std::size_t event_count) {
  return fmt::format("{:02d}_{}", event, template_name(template_of(event, event_count)));
}

SynthSource plan_source(const SynthSpec& spec, std::size_t index) {
  Rng rng(mix_seed(spec.seed, index));
  SynthSource src;
  src.seed = rng();
  src.event_count = spec.event_count;
  src.duration_s = spec.source_duration_s;
  src.noise_rms = spec.noise_rms;
  const double room = spec.source_duration_s - spec.clip_length_s - 2.0 * spec.placement_margin_s;
  src.clip_start_s = spec.placement_margin_s + uniform(rng, 0.0, room);
  src.clip_end_s = src.clip_start_s + spec.clip_length_s;

  const double total =
      std::accumulate(spec.events_per_clip.begin(), spec.events_per_clip.end(), 0.0);
  double u = uniform01(rng) * total;
  std::size_t count = 0;
  while (count + 1 < spec.events_per_clip.size() && u >= spec.events_per_clip[count]) {
    u -= spec.events_per_clip[count];
    ++count;
  }

  std::vector<std::size_t> classes(spec.event_count);
  std::iota(classes.begin(), classes.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, classes.size() - i));
    std::swap(classes[i], classes[j]);
  }
  classes.resize(count);
  std::sort(classes.begin(), classes.end());

  for (auto c : classes) {
    PlantedEvent ev;
    ev.event = c;
    ev.duration_s = uniform(rng, spec.min_event_s, spec.max_event_s);
    ev.onset_s = src.clip_start_s + uniform(rng, 0.0, spec.clip_length_s - ev.duration_s);
    ev.snr_db = uniform(rng, spec.min_snr_db, spec.max_snr_db);
    ev.instance_seed = rng();
    src.events.push_back(ev);
  }
  return src;
}

bool is_recipe(const std::string& audio_path) { return audio_path.starts_with("synth:"); }

std::string encode_recipe(const SynthSource& s) {
  std::vector<std::string> events;
  for (const auto& e : s.events) {
    events.push_back(fmt::format("{}:{}:{}:{}:{}", e.event, format_double(e.onset_s),
                                 format_double(e.duration_s), format_double(e.snr_db),
                                 e.instance_seed));
  }
  return fmt::format("synth:v1/seed={}/classes={}/dur={}/noise={}/clip={}:{}/events={}", s.seed,
                     s.event_count, format_double(s.duration_s), format_double(s.noise_rms),
                     format_double(s.clip_start_s), format_double(s.clip_end_s),
                     join(events, "+"));
}

SynthSource decode_recipe(const std::string& recipe) {
  if (!recipe.starts_with("synth:v1/")) throw FormatError("not a synth recipe: " + recipe);
  SynthSource s;
  const auto fields = split(recipe.substr(9), '/');
  std::size_t seen = 0;
  for (const auto& field : fields) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("malformed recipe field in: " + recipe);
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    ++seen;
    if (key == "seed") {
      s.seed = parse_count(value, recipe);
    } else if (key == "classes") {
      s.event_count = parse_count(value, recipe);
    } else if (key == "dur") {
      s.duration_s = parse_number(value, recipe);
    } else if (key == "noise") {
      s.noise_rms = parse_number(value, recipe);
    } else if (key == "clip") {
      const auto parts = split(value, ':');
      if (parts.size() != 2) throw FormatError("malformed clip field in: " + recipe);
      s.clip_start_s = parse_number(parts[0], recipe);
      s.clip_end_s = parse_number(parts[1], recipe);
    } else if (key == "events") {
      if (value.empty()) continue;
      for (const auto& item : split(value, '+')) {
        const auto p = split(item, ':');
        if (p.size() != 5) throw FormatError("malformed event in recipe: " + recipe);
        PlantedEvent e;
        e.event = parse_count(p[0], recipe);
        e.onset_s = parse_number(p[1], recipe);
        e.duration_s = parse_number(p[2], recipe);
        e.snr_db = parse_number(p[3], recipe);
        e.instance_seed = parse_count(p[4], recipe);
        if (e.event >= s.event_count && s.event_count > 0) {
          throw FormatError("recipe event index out of range: " + recipe);
        }
        s.events.push_back(e);
      }
    } else {
      throw FormatError("unknown recipe field '" + key + "' in: " + recipe);
    }
  }
  if (seen < 6 || s.event_count == 0 || !(s.duration_s > 0) || !(s.noise_rms > 0)) {
    throw FormatError("incomplete synth recipe: " + recipe);
  }
  return s;
}

dsp::Waveform render(const SynthSource& source, double start_s, double end_s) {
  if (!(start_s >= 0.0 && start_s < end_s)) {
    throw InvalidArgument(fmt::format("render: bad window [{}, {}]", start_s, end_s));
  }
  const double sr = dsp::kSampleRate;
  const auto first = static_cast<std::int64_t>(std::llround(start_s * sr));
  const auto count = static_cast<std::size_t>(std::llround((end_s - start_s) * sr));
  dsp::Waveform w;
  w.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::uint64_t>(first + static_cast<std::int64_t>(i));
    w.samples[i] = static_cast<float>(source.noise_rms * background_sample(source.seed, idx));
  }
  for (const auto& ev : source.events) {
    const Voice voice = make_voice(ev, source.event_count);
    const double amp = source.noise_rms * std::pow(10.0, ev.snr_db / 20.0);
    const auto on = static_cast<std::int64_t>(std::llround(ev.onset_s * sr));
    const auto len = static_cast<std::int64_t>(std::llround(ev.duration_s * sr));
    const auto lo = std::max(on, first);
    const auto hi = std::min(on + len, first + static_cast<std::int64_t>(count));
    for (auto j = lo; j < hi; ++j) {
      const double tau = static_cast<double>(j - on) / sr;
      w.samples[static_cast<std::size_t>(j - first)] +=
          static_cast<float>(amp * ramp(tau, ev.duration_s) * voice_value(voice, tau, ev.duration_s));
    }
  }
  return w;
}

Corpus synthesize_corpus(const SynthSpec& spec) {
  spec.validate();
  Corpus corpus;
  std::vector<std::string> names;
  for (std::size_t e = 0; e < spec.event_count; ++e) names.push_back(event_name(e, spec.event_count));
  corpus.vocabulary = EventVocabulary(std::move(names));
  for (std::size_t i = 0; i < spec.clip_count; ++i) {
    const SynthSource src = plan_source(spec, i);
    WeakClip clip;
    clip.clip_id = fmt::format("clip{:05d}", i);
    clip.span = {fmt::format("src{:05d}", i), src.clip_start_s, src.clip_end_s, src.duration_s};
    clip.audio_path = encode_recipe(src);
    clip.truth.emplace();
    for (const auto& ev : src.events) {
      clip.labels.push_back(ev.event);
      clip.truth->push_back({ev.event, ev.onset_s - src.clip_start_s,
                             ev.onset_s - src.clip_start_s + ev.duration_s});
    }
    corpus.clips.push_back(std::move(clip));
  }
  corpus.validate();
  return corpus;
}

}  // namespace walnet::data
