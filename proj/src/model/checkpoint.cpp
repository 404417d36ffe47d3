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

#include "walnet/model/checkpoint.hpp"

#include <bit>
#include <string>

#include "walnet/util/bytes.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::model {
namespace {

void put_f64(ByteWriter& w, double v) { w.u64(std::bit_cast<std::uint64_t>(v)); }
double get_f64(ByteReader& r) { return std::bit_cast<double>(r.u64()); }

void put_floats(ByteWriter& w, std::span<const float> values) {
  for (float v : values) w.f32(v);
}

void get_floats(ByteReader& r, std::span<float> values) {
  for (auto& v : values) v = r.f32();
}

}  // namespace

std::string encode_checkpoint(const Model<float>& model, const ad::AdamState<float>& adam) {
  ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic)));
  w.u32(kCheckpointVersion);

  const auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape()) w.u64(d);
  }
  for (const auto& p : params) put_floats(w, p.tensor.values());

  w.u64(adam.step_count);
  put_f64(w, adam.lr);
  put_f64(w, adam.beta1);
  put_f64(w, adam.beta2);
  put_f64(w, adam.eps);
  const bool has_moments = !adam.first_moment.empty();
  if (has_moments && (adam.first_moment.size() != params.size() ||
                      adam.second_moment.size() != params.size())) {
    throw InvalidArgument("Adam state does not match the model's parameter list");
  }
  w.u8(has_moments ? 1 : 0);
  if (has_moments) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (adam.first_moment[i].size() != params[i].tensor.numel() ||
          adam.second_moment[i].size() != params[i].tensor.numel()) {
        throw InvalidArgument("Adam moment size mismatch for " + params[i].name);
      }
      put_floats(w, adam.first_moment[i]);
      put_floats(w, adam.second_moment[i]);
    }
  }

  const auto norms = model.norms();
  w.u32(static_cast<std::uint32_t>(norms.size()));
  for (const auto& [name, state] : norms) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(state->channels()));
    put_f64(w, state->momentum);
    put_f64(w, state->eps);
    w.u64(state->updates);
    put_floats(w, state->running_mean);
    put_floats(w, state->running_var);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes, const ModelConfig& config,
                             const std::string& origin) {
  ByteReader r(bytes, origin);
  if (r.raw(sizeof(kCheckpointMagic)) != std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw FormatError(origin + ": not a walnet checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(origin + ": unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ck{Model<float>::build(config, 0), {}};
  auto params = ck.model.parameters();
  const auto count = r.u32();
  if (count != params.size()) {
    throw FormatError(origin + ": checkpoint holds " + std::to_string(count) +
                      " parameters, config expects " + std::to_string(params.size()));
  }
  for (const auto& p : params) {
    const auto name = r.str();
    ad::Shape shape(r.u32());
    for (auto& d : shape) d = r.u64();
    if (name != p.name || shape != p.tensor.shape()) {
      throw FormatError(origin + ": parameter " + name + " " + ad::to_string(shape) +
                        " does not match expected " + p.name + " " +
                        ad::to_string(p.tensor.shape()));
    }
  }
  for (auto& p : params) get_floats(r, p.tensor.mutable_values());

  ck.adam.step_count = r.u64();
  ck.adam.lr = get_f64(r);
  ck.adam.beta1 = get_f64(r);
  ck.adam.beta2 = get_f64(r);
  ck.adam.eps = get_f64(r);
  if (r.u8() != 0) {
    for (const auto& p : params) {
      ck.adam.first_moment.emplace_back(p.tensor.numel());
      ck.adam.second_moment.emplace_back(p.tensor.numel());
      get_floats(r, ck.adam.first_moment.back());
      get_floats(r, ck.adam.second_moment.back());
    }
  }

  auto norms = ck.model.norms();
  if (r.u32() != norms.size()) throw FormatError(origin + ": batch-norm count mismatch");
  for (auto& [expected, state] : norms) {
    const auto name = r.str();
    const auto channels = r.u32();
    if (name != expected || channels != state->channels()) {
      throw FormatError(origin + ": batch-norm " + name + " does not match expected " + expected);
    }
    state->momentum = get_f64(r);
    state->eps = get_f64(r);
    state->updates = r.u64();
    get_floats(r, state->running_mean);
    get_floats(r, state->running_var);
  }
  if (r.remaining() != 0) {
    throw FormatError(origin + ": " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return ck;
}

std::filesystem::path config_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p.replace_extension(".cfg");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const ad::AdamState<float>& adam) {
  write_file(path, encode_checkpoint(model, adam));
  KeyedText doc;
  model.config().write_to(doc);
  doc.write(config_path_for(path));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto config = ModelConfig::read_from(KeyedText::read(config_path_for(path)));
  return decode_checkpoint(read_file(path), config, path.string());
}

}  // namespace walnet::model
