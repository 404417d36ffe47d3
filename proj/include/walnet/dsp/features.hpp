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
#include <vector>

namespace walnet::dsp {

inline constexpr int kSampleRate = 44100;
inline constexpr std::size_t kWindowSamples = 1024;
inline constexpr std::size_t kHopSamples = 512;
inline constexpr std::size_t kMelBands = 128;
inline constexpr double kLogFloor = 1e-10;

// Mono audio. Only 44.1 kHz input is accepted; there is no resampler.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  void validate() const;
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class PadMode {
  kNone,    // frame t covers samples [t*hop, t*hop + window)
  kCenter,  // zero-pad window/2 on both ends first
};

// Frames x (window/2 + 1) power values, row-major.
struct PowerSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t k) const { return values[t * bins + k]; }
};

std::size_t frame_count(std::size_t length, std::size_t window = kWindowSamples,
                        std::size_t hop = kHopSamples, PadMode pad = PadMode::kNone);

// Squared DFT magnitude of periodic-Hann-windowed frames.
PowerSpectrogram stft(const Waveform& w, std::size_t window = kWindowSamples,
                      std::size_t hop = kHopSamples, PadMode pad = PadMode::kNone);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with break points equally spaced on the HTK mel scale
// from 0 Hz to Nyquist. Each weight is the mean of the triangle over the
// FFT bin's frequency cell, so narrow low-frequency filters still receive
// energy from the bin they overlap.
struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<double> weights;       // n_mels x n_bins, row-major
  std::vector<double> band_centers;  // Hz
  std::vector<std::size_t> first_bin;  // nonzero support per row, inclusive
  std::vector<std::size_t> last_bin;

  double weight(std::size_t mel, std::size_t bin) const { return weights[mel * n_bins + bin]; }
};

MelFilterbank mel_filterbank(std::size_t n_fft = kWindowSamples, std::size_t n_mels = kMelBands,
                             double sample_rate = kSampleRate);

// n x 128 log-mel matrix, time-major.
struct LogmelSpectrogram {
  std::size_t frames = 0;
  std::size_t bands = 0;
  std::vector<float> values;
  double frame_hop_seconds = static_cast<double>(kHopSamples) / kSampleRate;
  double frame_window_seconds = static_cast<double>(kWindowSamples) / kSampleRate;

  float at(std::size_t t, std::size_t m) const { return values[t * bands + m]; }
  void validate() const;
};

// filterbank * power for every frame, frames x n_mels row-major, before the log.
std::vector<double> mel_energies(const PowerSpectrogram& power, const MelFilterbank& fb);

// The 44.1 kHz / 1024-point / 128-band filterbank used by logmel().
const MelFilterbank& default_filterbank();

// log(filterbank * power + 1e-10) with natural log.
LogmelSpectrogram logmel(const Waveform& w, PadMode pad = PadMode::kNone);

}  // namespace walnet::dsp
