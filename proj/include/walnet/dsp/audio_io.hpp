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

#include <filesystem>
#include <string>

#include "walnet/dsp/features.hpp"

namespace walnet::dsp {

// RIFF/WAVE mono or multi-channel, 16-bit PCM or 32-bit float. Multi-channel
// input is averaged to mono.
Waveform read_wav(const std::filesystem::path& path);

// Mono 16-bit PCM, samples clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& w);
std::string encode_wav(const Waveform& w);

// Feature cache: little-endian u32 n, u32 m, then n*m float32, time-major.
void write_feature_file(const std::filesystem::path& path, const LogmelSpectrogram& x);
LogmelSpectrogram read_feature_file(const std::filesystem::path& path);

std::string encode_features(const LogmelSpectrogram& x);
LogmelSpectrogram decode_features(const std::string& bytes, const std::string& origin);

}  // namespace walnet::dsp
