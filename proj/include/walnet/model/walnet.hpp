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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "walnet/ad/ops.hpp"
#include "walnet/dsp/features.hpp"
#include "walnet/model/config.hpp"
#include "walnet/model/geometry.hpp"

namespace walnet::model {

template <typename T>
struct NamedTensor {
  std::string name;
  ad::Tensor<T> tensor;
};

template <typename T>
struct ConvLayer {
  std::string name;
  ad::Tensor<T> weight;
  ad::BatchNormState<T> norm;
};

// K x C segment-level posteriors for one recording.
struct SegmentPosteriors {
  std::size_t segments = 0;
  std::size_t classes = 0;
  std::vector<double> values;  // row-major, segment-major
  std::vector<FrameSpan> spans;

  double at(std::size_t k, std::size_t c) const { return values[k * classes + c]; }
};

struct RecordingPosteriors {
  std::vector<double> values;
};

// The WAL-Net parameter set. Move-only: copying handles would alias the
// underlying parameter storage, so deep copies go through clone().
template <typename T>
class Model {
 public:
  struct Output {
    ad::Tensor<T> segments;   // [N, C, K]
    ad::Tensor<T> recording;  // [N, C]
  };

  static Model build(const ModelConfig& config, std::uint64_t seed);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  Model clone() const { return cast<T>(); }
  template <typename U>
  Model<U> cast() const;

  // input: [N, 1, n, mel_bands] with n >= 128.
  Output forward(const ad::Tensor<T>& input, ad::Mode mode);

  const ModelConfig& config() const { return config_; }

  // Learnable tensors in a fixed order: conv weights, norm gammas/betas, L8
  // weight and bias.
  std::vector<NamedTensor<T>> parameters() const;
  std::vector<ad::Tensor<T>> parameter_tensors() const;
  std::size_t parameter_count() const;

  std::vector<std::pair<std::string, ad::BatchNormState<T>*>> norms();
  std::vector<std::pair<std::string, const ad::BatchNormState<T>*>> norms() const;

  std::vector<ConvLayer<T>>& conv_layers() { return convs_; }
  ad::Tensor<T>& l8_weight() { return l8_weight_; }
  ad::Tensor<T>& l8_bias() { return l8_bias_; }

  void zero_grad();

 private:
  Model() = default;
  template <typename U>
  friend class Model;

  ModelConfig config_;
  std::vector<ConvLayer<T>> convs_;  // L1..L6 convs in order, then L7
  ad::Tensor<T> l8_weight_;
  ad::Tensor<T> l8_bias_;
};

// Stacks equal-length spectrograms into an [N, 1, n, m] input tensor.
template <typename T>
ad::Tensor<T> make_batch(std::span<const dsp::LogmelSpectrogram* const> clips);

// Single-recording forward pass.
template <typename T>
std::pair<SegmentPosteriors, RecordingPosteriors> forward(Model<T>& model,
                                                          const dsp::LogmelSpectrogram& x,
                                                          ad::Mode mode);

}  // namespace walnet::model
