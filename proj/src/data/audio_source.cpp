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

#include "walnet/data/audio_source.hpp"

#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "walnet/data/synth.hpp"
#include "walnet/dsp/audio_io.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::data {

dsp::Waveform clip_audio(const WeakClip& clip, const std::filesystem::path& base_dir) {
  if (is_recipe(clip.audio_path)) {
    return render(decode_recipe(clip.audio_path), clip.span.start_s, clip.span.end_s);
  }
  if (clip.audio_path.empty()) throw InvalidArgument("clip '" + clip.clip_id + "' has no audio");
  std::filesystem::path path(clip.audio_path);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  dsp::Waveform source = dsp::read_wav(path);
  const double sr = source.sample_rate;
  const auto first = static_cast<std::size_t>(std::llround(clip.span.start_s * sr));
  const auto count =
      static_cast<std::size_t>(std::llround((clip.span.end_s - clip.span.start_s) * sr));
  if (first + count > source.samples.size()) {
    throw InvalidArgument(fmt::format("clip '{}': span [{}, {}] s runs past the end of {} ({} s)",
                                      clip.clip_id, clip.span.start_s, clip.span.end_s,
                                      path.string(), source.duration_seconds()));
  }
  dsp::Waveform out;
  out.sample_rate = source.sample_rate;
  out.samples.assign(source.samples.begin() + static_cast<std::ptrdiff_t>(first),
                     source.samples.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

dsp::LogmelSpectrogram clip_features(const WeakClip& clip, const std::filesystem::path& base_dir) {
  return dsp::logmel(clip_audio(clip, base_dir));
}

std::string feature_cache_name(const WeakClip& clip) {
  const std::string key = clip.audio_path + "|" + format_double(clip.span.start_s) + "|" +
                          format_double(clip.span.end_s);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{}-{:016x}.lmf", clip.clip_id, h);
}

std::vector<dsp::LogmelSpectrogram> corpus_features(const Corpus& corpus,
                                                    const std::filesystem::path& cache_dir,
                                                    std::size_t jobs) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.clips.size());
  std::vector<dsp::LogmelSpectrogram> out(corpus.clips.size());
  std::vector<std::exception_ptr> errors(corpus.clips.size());
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);
  const int threads = static_cast<int>(std::max<std::size_t>(jobs, 1));

#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& clip = corpus.clips[static_cast<std::size_t>(i)];
    try {
      if (cache_dir.empty()) {
        out[static_cast<std::size_t>(i)] = clip_features(clip, corpus.base_dir);
        continue;
      }
      const auto path = cache_dir / feature_cache_name(clip);
      if (std::filesystem::exists(path)) {
        out[static_cast<std::size_t>(i)] = dsp::read_feature_file(path);
      } else {
        out[static_cast<std::size_t>(i)] = clip_features(clip, corpus.base_dir);
        dsp::write_feature_file(path, out[static_cast<std::size_t>(i)]);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace walnet::data
