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

#include "walnet/model/walnet.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "walnet/util/error.hpp"
#include "walnet/util/rng.hpp"

namespace walnet::model {
namespace {

template <typename T>
void fill_uniform(ad::Tensor<T>& t, double bound, Rng& rng) {
  for (auto& v : t.mutable_values()) v = static_cast<T>(uniform(rng, -bound, bound));
}

}  // namespace

template <typename T>
Model<T> Model<T>::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model model;
  model.config_ = config;
  Rng rng(seed);

  std::size_t in_channels = 1;
  for (std::size_t b = 0; b < 6; ++b) {
    const std::size_t out = config.block_filters[b];
    for (std::size_t j = 0; j < config.convs_per_block; ++j) {
      ConvLayer<T> layer;
      layer.name = "l" + std::to_string(b + 1) + ".conv" + std::to_string(j + 1);
      layer.weight = ad::Tensor<T>::zeros({out, in_channels, 3, 3}, true);
      fill_uniform(layer.weight, std::sqrt(6.0 / static_cast<double>(in_channels * 9)), rng);
      layer.norm = ad::BatchNormState<T>::create(out);
      model.convs_.push_back(std::move(layer));
      in_channels = out;
    }
  }

  ConvLayer<T> l7;
  l7.name = "l7.conv";
  l7.weight = ad::Tensor<T>::zeros({config.l7_filters, in_channels, 2, 2}, true);
  fill_uniform(l7.weight, std::sqrt(6.0 / static_cast<double>(in_channels * 4)), rng);
  l7.norm = ad::BatchNormState<T>::create(config.l7_filters);
  model.convs_.push_back(std::move(l7));

  model.l8_weight_ = ad::Tensor<T>::zeros({config.class_count, config.l7_filters, 1, 1}, true);
  fill_uniform(model.l8_weight_, 1.0 / std::sqrt(static_cast<double>(config.l7_filters)), rng);
  model.l8_bias_ = ad::Tensor<T>::zeros({config.class_count}, true);
  return model;
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
  Model<U> out;
  out.config_ = config_;
  auto convert = [](const ad::Tensor<T>& src) {
    std::vector<U> values(src.values().begin(), src.values().end());
    return ad::Tensor<U>::from(src.shape(), std::move(values), src.requires_grad());
  };
  for (const auto& layer : convs_) {
    ConvLayer<U> copy;
    copy.name = layer.name;
    copy.weight = convert(layer.weight);
    copy.norm.gamma = convert(layer.norm.gamma);
    copy.norm.beta = convert(layer.norm.beta);
    copy.norm.running_mean.assign(layer.norm.running_mean.begin(), layer.norm.running_mean.end());
    copy.norm.running_var.assign(layer.norm.running_var.begin(), layer.norm.running_var.end());
    copy.norm.momentum = layer.norm.momentum;
    copy.norm.eps = layer.norm.eps;
    copy.norm.updates = layer.norm.updates;
    out.convs_.push_back(std::move(copy));
  }
  out.l8_weight_ = convert(l8_weight_);
  out.l8_bias_ = convert(l8_bias_);
  return out;
}

template <typename T>
typename Model<T>::Output Model<T>::forward(const ad::Tensor<T>& input, ad::Mode mode) {
  if (input.rank() != 4 || input.dim(1) != 1 || input.dim(3) != config_.mel_bands) {
    throw ShapeError("model input must be [N, 1, n, " + std::to_string(config_.mel_bands) +
                     "], got " + ad::to_string(input.shape()));
  }
  const std::size_t segments = segment_count(input.dim(2));

  ad::Tensor<T> h = input;
  const std::size_t per_block = config_.convs_per_block;
  for (std::size_t i = 0; i + 1 < convs_.size(); ++i) {
    auto& layer = convs_[i];
    h = ad::conv2d(h, layer.weight, ad::Tensor<T>(), 1, 1);
    h = ad::relu(ad::batchnorm2d(h, layer.norm, mode));
    if ((i + 1) % per_block == 0) h = ad::maxpool2d(h);
  }
  auto& l7 = convs_.back();
  h = ad::conv2d(h, l7.weight, ad::Tensor<T>(), 1, 0);
  h = ad::relu(ad::batchnorm2d(h, l7.norm, mode));
  h = ad::sigmoid(ad::conv2d(h, l8_weight_, l8_bias_, 1, 0));

  const std::size_t n = input.dim(0);
  if (h.dim(2) != segments || h.dim(3) != 1) {
    throw ShapeError("L8 output " + ad::to_string(h.shape()) + " does not match " +
                     std::to_string(segments) + " segments");
  }
  Output out;
  out.segments = ad::reshape(h, {n, config_.class_count, segments});
  out.recording = ad::global_pool(out.segments, config_.pooling);
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> Model<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (const auto& layer : convs_) {
    out.push_back({layer.name + ".weight", layer.weight});
    out.push_back({layer.name + ".bn.gamma", layer.norm.gamma});
    out.push_back({layer.name + ".bn.beta", layer.norm.beta});
  }
  out.push_back({"l8.conv.weight", l8_weight_});
  out.push_back({"l8.conv.bias", l8_bias_});
  return out;
}

template <typename T>
std::vector<ad::Tensor<T>> Model<T>::parameter_tensors() const {
  std::vector<ad::Tensor<T>> out;
  for (auto& p : parameters()) out.push_back(p.tensor);
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor.numel();
  return total;
}

template <typename T>
std::vector<std::pair<std::string, ad::BatchNormState<T>*>> Model<T>::norms() {
  std::vector<std::pair<std::string, ad::BatchNormState<T>*>> out;
  for (auto& layer : convs_) out.emplace_back(layer.name + ".bn", &layer.norm);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const ad::BatchNormState<T>*>> Model<T>::norms() const {
  std::vector<std::pair<std::string, const ad::BatchNormState<T>*>> out;
  for (const auto& layer : convs_) out.emplace_back(layer.name + ".bn", &layer.norm);
  return out;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

template <typename T>
ad::Tensor<T> make_batch(std::span<const dsp::LogmelSpectrogram* const> clips) {
  if (clips.empty()) throw InvalidArgument("make_batch: no clips");
  const std::size_t frames = clips[0]->frames;
  const std::size_t bands = clips[0]->bands;
  std::vector<T> values;
  values.reserve(clips.size() * frames * bands);
  for (const auto* clip : clips) {
    if (clip->frames != frames || clip->bands != bands) {
      throw ShapeError("make_batch: clips must share one shape, got " +
                       std::to_string(clip->frames) + "x" + std::to_string(clip->bands) +
                       " after " + std::to_string(frames) + "x" + std::to_string(bands));
    }
    values.insert(values.end(), clip->values.begin(), clip->values.end());
  }
  return ad::Tensor<T>::from({clips.size(), 1, frames, bands}, std::move(values));
}

template <typename T>
std::pair<SegmentPosteriors, RecordingPosteriors> forward(Model<T>& model,
                                                          const dsp::LogmelSpectrogram& x,
                                                          ad::Mode mode) {
  segment_count(x.frames);
  const dsp::LogmelSpectrogram* one[] = {&x};
  std::optional<ad::NoGradGuard> guard;
  if (mode == ad::Mode::kEval) guard.emplace();
  auto out = model.forward(make_batch<T>(one), mode);

  SegmentPosteriors seg;
  seg.segments = out.segments.dim(2);
  seg.classes = out.segments.dim(1);
  seg.values.resize(seg.segments * seg.classes);
  const auto v = out.segments.values();
  for (std::size_t c = 0; c < seg.classes; ++c) {
    for (std::size_t k = 0; k < seg.segments; ++k) {
      seg.values[k * seg.classes + c] = static_cast<double>(v[c * seg.segments + k]);
    }
  }
  for (std::size_t k = 0; k < seg.segments; ++k) seg.spans.push_back(segment_span(k, seg.segments));

  RecordingPosteriors rec;
  rec.values.assign(out.recording.values().begin(), out.recording.values().end());
  return {std::move(seg), std::move(rec)};
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;
template ad::Tensor<float> make_batch<float>(std::span<const dsp::LogmelSpectrogram* const>);
template ad::Tensor<double> make_batch<double>(std::span<const dsp::LogmelSpectrogram* const>);
template std::pair<SegmentPosteriors, RecordingPosteriors> forward<float>(
    Model<float>&, const dsp::LogmelSpectrogram&, ad::Mode);
template std::pair<SegmentPosteriors, RecordingPosteriors> forward<double>(
    Model<double>&, const dsp::LogmelSpectrogram&, ad::Mode);

}  // namespace walnet::model
