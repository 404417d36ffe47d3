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

#include "walnet/dsp/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <memory>
#include <mutex>
#include <numbers>

#include "walnet/util/error.hpp"

namespace walnet::dsp {

namespace {

// The FFTW planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding,
    // identical from run to run.
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (!plan_) throw Error("fftw: failed to create plan");
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

// Antiderivative of the unit-peak triangle (lo, mid, hi).
double triangle_integral(double x, double lo, double mid, double hi) {
  if (x <= lo) return 0.0;
  if (x <= mid) return (x - lo) * (x - lo) / (2.0 * (mid - lo));
  if (x <= hi) {
    const double a = hi - mid;
    return 0.5 * (mid - lo) + (a * a - (hi - x) * (hi - x)) / (2.0 * a);
  }
  return 0.5 * (hi - lo);
}

}  // namespace

void Waveform::validate() const {
  if (sample_rate != kSampleRate) {
    throw InvalidArgument(fmt::format("waveform sample rate {} Hz, expected {} Hz", sample_rate,
                                      kSampleRate));
  }
  if (samples.empty()) throw InvalidArgument("waveform is empty");
}

std::size_t frame_count(std::size_t length, std::size_t window, std::size_t hop, PadMode pad) {
  if (window == 0 || hop == 0) throw InvalidArgument("stft: window and hop must be positive");
  const std::size_t padded = pad == PadMode::kCenter ? length + 2 * (window / 2) : length;
  if (padded < window) return 0;
  return (padded - window) / hop + 1;
}

PowerSpectrogram stft(const Waveform& w, std::size_t window, std::size_t hop, PadMode pad) {
  w.validate();
  const std::size_t frames = frame_count(w.samples.size(), window, hop, pad);
  if (frames == 0) {
    throw InvalidArgument(fmt::format("stft: waveform of {} samples is shorter than one {}-sample window",
                                      w.samples.size(), window));
  }
  const std::size_t offset = pad == PadMode::kCenter ? window / 2 : 0;
  const std::size_t bins = window / 2 + 1;

  std::vector<double> hann(window);
  for (std::size_t i = 0; i < window; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(window));
  }

  PowerSpectrogram out{frames, bins, std::vector<double>(frames * bins)};
  RealFft fft(window);
  const auto n = static_cast<std::ptrdiff_t>(w.samples.size());
  for (std::size_t t = 0; t < frames; ++t) {
    double* in = fft.input();
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(offset);
    for (std::size_t i = 0; i < window; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      const double s = (idx >= 0 && idx < n) ? static_cast<double>(w.samples[idx]) : 0.0;
      in[i] = s * hann[i];
    }
    fft.run();
    const fftw_complex* spec = fft.output();
    double* row = out.values.data() + t * bins;
    for (std::size_t k = 0; k < bins; ++k) {
      row[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(std::size_t n_fft, std::size_t n_mels, double sample_rate) {
  if (n_mels < 1) throw InvalidArgument("mel_filterbank: n_mels must be >= 1");
  if (n_fft < 2) throw InvalidArgument("mel_filterbank: n_fft must be >= 2");
  if (!(sample_rate > 0)) throw InvalidArgument("mel_filterbank: sample_rate must be positive");

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = n_fft / 2 + 1;
  fb.weights.assign(fb.n_mels * fb.n_bins, 0.0);
  fb.band_centers.resize(n_mels);
  fb.first_bin.resize(n_mels);
  fb.last_bin.resize(n_mels);

  const double top_mel = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top_mel * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  const double bin_hz = sample_rate / static_cast<double>(n_fft);

  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    fb.band_centers[m] = mid;
    bool any = false;
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      const double a = (static_cast<double>(k) - 0.5) * bin_hz;
      const double b = (static_cast<double>(k) + 0.5) * bin_hz;
      const double v = (triangle_integral(b, lo, mid, hi) - triangle_integral(a, lo, mid, hi)) / bin_hz;
      if (v > 0.0) {
        fb.weights[m * fb.n_bins + k] = v;
        if (!any) fb.first_bin[m] = k;
        fb.last_bin[m] = k;
        any = true;
      }
    }
    if (!any) throw Error(fmt::format("mel_filterbank: filter {} has no support", m));
  }
  return fb;
}

void LogmelSpectrogram::validate() const {
  if (bands != kMelBands) {
    throw InvalidArgument(fmt::format("logmel: {} mel bands, expected {}", bands, kMelBands));
  }
  if (frames < 1) throw InvalidArgument("logmel: no frames");
  if (values.size() != frames * bands) throw InvalidArgument("logmel: value count mismatch");
  for (float v : values) {
    if (!std::isfinite(v)) throw NumericError("logmel: non-finite value");
  }
}

std::vector<double> mel_energies(const PowerSpectrogram& power, const MelFilterbank& fb) {
  if (power.bins != fb.n_bins) {
    throw ShapeError(fmt::format("mel_energies: spectrum has {} bins, filterbank expects {}",
                                 power.bins, fb.n_bins));
  }
  std::vector<double> out(power.frames * fb.n_mels);
  for (std::size_t t = 0; t < power.frames; ++t) {
    const double* row = power.values.data() + t * power.bins;
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      const double* wrow = fb.weights.data() + m * fb.n_bins;
      double e = 0.0;
      for (std::size_t k = fb.first_bin[m]; k <= fb.last_bin[m]; ++k) e += wrow[k] * row[k];
      out[t * fb.n_mels + m] = e;
    }
  }
  return out;
}

const MelFilterbank& default_filterbank() {
  static const MelFilterbank fb = mel_filterbank();
  return fb;
}

LogmelSpectrogram logmel(const Waveform& w, PadMode pad) {
  const MelFilterbank& fb = default_filterbank();
  const std::vector<double> energy = mel_energies(stft(w, kWindowSamples, kHopSamples, pad), fb);

  LogmelSpectrogram out;
  out.bands = fb.n_mels;
  out.frames = energy.size() / out.bands;
  out.values.resize(energy.size());
  std::transform(energy.begin(), energy.end(), out.values.begin(),
                 [](double e) { return static_cast<float>(std::log(e + kLogFloor)); });
  return out;
}

}  // namespace walnet::dsp
