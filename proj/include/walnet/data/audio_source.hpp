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
#include <filesystem>
#include <string>
#include <vector>

#include "walnet/data/corpus.hpp"
#include "walnet/dsp/features.hpp"

namespace walnet::data {

// Audio for the clip's span, rendered from its recipe or cut from the
// source file.
dsp::Waveform clip_audio(const WeakClip& clip, const std::filesystem::path& base_dir);

dsp::LogmelSpectrogram clip_features(const WeakClip& clip, const std::filesystem::path& base_dir);

// Cache file name "<clip_id>-<16 hex digits>.lmf"; the digits hash the audio
// path and the span so expanded variants of a clip never collide.
std::string feature_cache_name(const WeakClip& clip);

// Logmels for every clip, in corpus order. With a cache directory, existing
// files are read and missing ones written. jobs > 1 computes clips in
// parallel; results do not depend on jobs.
std::vector<dsp::LogmelSpectrogram> corpus_features(const Corpus& corpus,
                                                    const std::filesystem::path& cache_dir = {},
                                                    std::size_t jobs = 1);

}  // namespace walnet::data
