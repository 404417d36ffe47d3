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

#include "walnet/ad/ops.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::model {

// Architecture hyperparameters. Blocks L1..L6 each hold convs_per_block
// 3x3 convolutions (batch norm + ReLU) followed by 2x2 max pooling; L7 is a
// 2x2 convolution with l7_filters outputs; L8 is a 1x1 convolution with one
// sigmoid output per class.
struct ModelConfig {
  std::size_t class_count = 527;
  std::vector<std::size_t> block_filters{16, 32, 64, 128, 256, 512};
  std::size_t convs_per_block = 2;
  std::size_t l7_filters = 1024;
  ad::Pooling pooling = ad::Pooling::kAvg;
  std::size_t mel_bands = 128;

  void validate() const;

  // Keys: class_count, block_filters (comma list), convs_per_block,
  // l7_filters, pooling (avg|max), mel_bands. Missing keys keep defaults.
  void write_to(KeyedText& doc) const;
  static ModelConfig read_from(const KeyedText& doc);

  bool operator==(const ModelConfig&) const = default;
};

// Narrow variant sized for CPU-only experiments on the synthetic corpus:
// filters 8,16,16,32,32,64, one conv per block, 64 L7 filters.
ModelConfig desk_config(std::size_t class_count);

const char* to_string(ad::Pooling pooling);
ad::Pooling parse_pooling(const std::string& text);

}  // namespace walnet::model
