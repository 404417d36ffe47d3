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
#include <string>
#include <vector>

#include "walnet/data/corpus.hpp"
#include "walnet/dsp/features.hpp"

namespace walnet::data {

// Parameters of the synthetic corpus generator. Every clip is cut from its
// own virtual source recording: white-noise background over the whole source
// with events planted only inside the clip span.
struct SynthSpec {
  std::size_t event_count = 8;
  std::size_t clip_count = 500;
  double clip_length_s = 10.0;
  // Probability of planting 0, 1, 2, ... events in a clip.
  std::vector<double> events_per_clip{0.1, 0.6, 0.25, 0.05};
  double min_event_s = 1.0;
  double max_event_s = 3.0;
  double min_snr_db = -22.0;
  double max_snr_db = -10.0;
  double source_duration_s = 300.0;
  // Minimum distance between the clip span and either end of its source.
  double placement_margin_s = 25.0;
  double noise_rms = 0.05;
  std::uint64_t seed = 7;

  void validate() const;
};

enum class Template { kTone, kChirp, kNoiseBand, kAmTone, kPulseTrain };

// Template family and center frequency of class c out of C.
Template template_of(std::size_t event, std::size_t event_count);
double center_frequency_hz(std::size_t event, std::size_t event_count);
std::string event_name(std::size_t event, std::size_t event_count);

struct PlantedEvent {
  std::size_t event = 0;
  double onset_s = 0.0;  // source time
  double duration_s = 0.0;
  double snr_db = 0.0;
  std::uint64_t instance_seed = 0;
};

// Everything needed to render one virtual source.
struct SynthSource {
  std::uint64_t seed = 0;
  std::size_t event_count = 0;
  double duration_s = 0.0;
  double noise_rms = 0.05;
  double clip_start_s = 0.0;
  double clip_end_s = 0.0;
  std::vector<PlantedEvent> events;
};

// Draws the source behind clip i. Pure function of (spec, i).
SynthSource plan_source(const SynthSpec& spec, std::size_t index);

// "synth:" recipe that round-trips a SynthSource exactly.
std::string encode_recipe(const SynthSource& source);
SynthSource decode_recipe(const std::string& recipe);
bool is_recipe(const std::string& audio_path);

// Samples [round(start_s * sr), round(start_s * sr) + round((end_s - start_s) * sr))
// of the source. The same source sample always gets the same value.
dsp::Waveform render(const SynthSource& source, double start_s, double end_s);

// Clips "clip00000".. with labels equal to the set of planted events,
// clip-relative truth intervals and recipe audio paths.
Corpus synthesize_corpus(const SynthSpec& spec);

}  // namespace walnet::data
