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

#include "walnet/ad/adam.hpp"
#include "walnet/model/walnet.hpp"

namespace walnet::model {

// Binary layout is documented in docs/checkpoint_format.md.
inline constexpr char kCheckpointMagic[8] = {'W', 'A', 'L', 'N', 'E', 'T', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model<float> model;
  ad::AdamState<float> adam;
};

std::string encode_checkpoint(const Model<float>& model, const ad::AdamState<float>& adam);
Checkpoint decode_checkpoint(const std::string& bytes, const ModelConfig& config,
                             const std::string& origin);

// Writes <path> and the model config as keyed text at config_path_for(path).
void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const ad::AdamState<float>& adam);
// Reads the sibling config, builds the architecture and fills it.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path config_path_for(const std::filesystem::path& checkpoint);

}  // namespace walnet::model
