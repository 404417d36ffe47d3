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

#include "walnet/dsp/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "walnet/util/bytes.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"

namespace walnet::dsp {

std::string encode_wav(const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = n * 2;
  ByteWriter out;
  out.raw("RIFF");
  out.u32(36 + data_bytes);
  out.raw("WAVE");
  out.raw("fmt ");
  out.u32(16);
  out.u16(1);  // PCM
  out.u16(1);  // mono
  out.u32(static_cast<std::uint32_t>(w.sample_rate));
  out.u32(static_cast<std::uint32_t>(w.sample_rate) * 2);
  out.u16(2);
  out.u16(16);
  out.raw("data");
  out.u32(data_bytes);
  for (float s : w.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    out.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0f))));
  }
  return out.take();
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  write_file(path, encode_wav(w));
}

Waveform read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader in(bytes, path.string());
  if (in.raw(4) != "RIFF") throw FormatError(path.string() + ": not a RIFF file");
  in.u32();
  if (in.raw(4) != "WAVE") throw FormatError(path.string() + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (in.remaining() >= 8) {
    const std::string id(in.raw(4));
    const std::uint32_t size = in.u32();
    if (id == "fmt ") {
      ByteReader chunk(in.raw(size), path.string());
      format = chunk.u16();
      channels = chunk.u16();
      rate = chunk.u32();
      chunk.u32();
      chunk.u16();
      bits = chunk.u16();
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt || channels == 0) throw FormatError(path.string() + ": data before fmt chunk");
      const bool pcm16 = format == 1 && bits == 16;
      const bool float32 = format == 3 && bits == 32;
      if (!pcm16 && !float32) {
        throw FormatError(fmt::format("{}: unsupported WAV encoding (format {}, {} bits)",
                                      path.string(), format, bits));
      }
      const std::size_t width = bits / 8;
      const std::size_t frames = size / (width * channels);
      ByteReader data(in.raw(frames * width * channels), path.string());
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          acc += pcm16 ? static_cast<std::int16_t>(data.u16()) / 32768.0 : data.f32();
        }
        w.samples[i] = static_cast<float>(acc / channels);
      }
      return w;
    } else {
      in.raw(size + (size & 1u));
    }
  }
  throw FormatError(path.string() + ": no data chunk");
}

std::string encode_features(const LogmelSpectrogram& x) {
  ByteWriter out;
  out.u32(static_cast<std::uint32_t>(x.frames));
  out.u32(static_cast<std::uint32_t>(x.bands));
  for (float v : x.values) out.f32(v);
  return out.take();
}

LogmelSpectrogram decode_features(const std::string& bytes, const std::string& origin) {
  ByteReader in(bytes, origin);
  LogmelSpectrogram x;
  x.frames = in.u32();
  x.bands = in.u32();
  if (in.remaining() != x.frames * x.bands * 4) {
    throw FormatError(fmt::format("{}: header says {}x{} but payload has {} bytes", origin,
                                  x.frames, x.bands, in.remaining()));
  }
  x.values.resize(x.frames * x.bands);
  for (auto& v : x.values) v = in.f32();
  return x;
}

void write_feature_file(const std::filesystem::path& path, const LogmelSpectrogram& x) {
  write_file(path, encode_features(x));
}

LogmelSpectrogram read_feature_file(const std::filesystem::path& path) {
  return decode_features(read_file(path), path.string());
}

}  // namespace walnet::dsp
