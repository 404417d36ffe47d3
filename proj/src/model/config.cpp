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

#include "walnet/model/config.hpp"

#include <string>

#include "walnet/util/error.hpp"

namespace walnet::model {

const char* to_string(ad::Pooling pooling) {
  return pooling == ad::Pooling::kAvg ? "avg" : "max";
}

ad::Pooling parse_pooling(const std::string& text) {
  if (text == "avg") return ad::Pooling::kAvg;
  if (text == "max") return ad::Pooling::kMax;
  throw InvalidArgument("pooling must be 'avg' or 'max', got '" + text + "'");
}

void ModelConfig::validate() const {
  if (class_count < 1) throw InvalidArgument("class_count must be at least 1");
  if (block_filters.size() != 6) {
    throw InvalidArgument("block_filters must list 6 entries, got " +
                          std::to_string(block_filters.size()));
  }
  for (std::size_t f : block_filters) {
    if (f < 1) throw InvalidArgument("block_filters entries must be positive");
  }
  if (convs_per_block < 1) throw InvalidArgument("convs_per_block must be at least 1");
  if (l7_filters < 1) throw InvalidArgument("l7_filters must be at least 1");
  if (mel_bands != 128) {
    throw InvalidArgument("mel_bands must be 128 (the L7 2x2 convolution needs the frequency axis "
                          "to reach exactly 2), got " +
                          std::to_string(mel_bands));
  }
}

void ModelConfig::write_to(KeyedText& doc) const {
  std::vector<std::string> filters;
  for (std::size_t f : block_filters) filters.push_back(std::to_string(f));
  doc.set("class_count", static_cast<std::uint64_t>(class_count));
  doc.set("block_filters", join(filters, ","));
  doc.set("convs_per_block", static_cast<std::uint64_t>(convs_per_block));
  doc.set("l7_filters", static_cast<std::uint64_t>(l7_filters));
  doc.set("pooling", std::string(to_string(pooling)));
  doc.set("mel_bands", static_cast<std::uint64_t>(mel_bands));
}

ModelConfig desk_config(std::size_t class_count) {
  ModelConfig cfg;
  cfg.class_count = class_count;
  cfg.block_filters = {8, 16, 16, 32, 32, 64};
  cfg.convs_per_block = 1;
  cfg.l7_filters = 64;
  return cfg;
}

ModelConfig ModelConfig::read_from(const KeyedText& doc) {
  ModelConfig cfg;
  cfg.class_count = doc.get_uint("class_count", cfg.class_count);
  if (auto text = doc.find("block_filters")) {
    cfg.block_filters.clear();
    for (const auto& part : split(*text, ',')) {
      const auto item = std::string(trim(part));
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (item.empty() || used != item.size()) {
        throw FormatError("block_filters: '" + item + "' is not a count");
      }
      cfg.block_filters.push_back(static_cast<std::size_t>(v));
    }
  }
  cfg.convs_per_block = doc.get_uint("convs_per_block", cfg.convs_per_block);
  cfg.l7_filters = doc.get_uint("l7_filters", cfg.l7_filters);
  cfg.pooling = parse_pooling(doc.get_string("pooling", to_string(cfg.pooling)));
  cfg.mel_bands = doc.get_uint("mel_bands", cfg.mel_bands);
  return cfg;
}

}  // namespace walnet::model
