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
#include <cstdint>

// Compute kernels behind the autodiff operators. Two implementations share
// each signature: walnet::kernels (OpenMP-parallel, im2col + BLAS GEMM for
// convolution) and walnet::kernels::reference (plain serial loops, kept as the
// test oracle and benchmark baseline). All backward kernels accumulate into
// their gradient outputs. Parallel loops partition work so that every output
// element is written by exactly one thread with a fixed summation order, so
// results do not depend on the thread count.

namespace walnet::kernels {

// NCHW convolution with square stride and symmetric zero padding.
struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t in_h = 1;
  std::size_t in_w = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_h() const { return (in_h + 2 * pad - kernel_h) / stride + 1; }
  std::size_t out_w() const { return (in_w + 2 * pad - kernel_w) / stride + 1; }
  std::size_t patch() const { return in_channels * kernel_h * kernel_w; }
};

// Planes are N*C contiguous HxW images.
struct PlaneGeometry {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t plane() const { return h * w; }
  std::size_t size() const { return batch * channels * h * w; }
};

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y);

// dx and dbias may be null.
template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* dbias);

// Non-overlapping 2x2 max. argmax holds the flat in-plane index of the winner;
// ties go to the first element in row-major order.
template <typename T>
void maxpool2x2_forward(const PlaneGeometry& g, const T* x, T* y, std::uint32_t* argmax);

template <typename T>
void maxpool2x2_backward(const PlaneGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx);

// Per-channel mean and biased variance over (batch, h, w).
template <typename T>
void channel_moments(const PlaneGeometry& g, const T* x, double* mean, double* var);

// y = gamma * (x - mean) * inv_std + beta, per channel.
template <typename T>
void batchnorm_apply(const PlaneGeometry& g, const T* x, const double* mean, const double* inv_std,
                     const T* gamma, const T* beta, T* y);

// Backward through batchnorm_apply. With batch_stats the mean and inv_std are
// treated as functions of x (train mode); otherwise as constants (eval mode).
template <typename T>
void batchnorm_backward(const PlaneGeometry& g, const T* x, const double* mean,
                        const double* inv_std, const T* gamma, const T* dy, bool batch_stats,
                        T* dx, T* dgamma, T* dbeta);

template <typename T>
void relu_forward(std::size_t n, const T* x, T* y);
template <typename T>
void relu_backward(std::size_t n, const T* x, const T* dy, T* dx);
template <typename T>
void sigmoid_forward(std::size_t n, const T* x, T* y);
template <typename T>
void sigmoid_backward(std::size_t n, const T* y, const T* dy, T* dx);

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y);
template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* dbias);
template <typename T>
void maxpool2x2_forward(const PlaneGeometry& g, const T* x, T* y, std::uint32_t* argmax);
template <typename T>
void maxpool2x2_backward(const PlaneGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx);
template <typename T>
void channel_moments(const PlaneGeometry& g, const T* x, double* mean, double* var);
template <typename T>
void batchnorm_apply(const PlaneGeometry& g, const T* x, const double* mean, const double* inv_std,
                     const T* gamma, const T* beta, T* y);
template <typename T>
void batchnorm_backward(const PlaneGeometry& g, const T* x, const double* mean,
                        const double* inv_std, const T* gamma, const T* dy, bool batch_stats,
                        T* dx, T* dgamma, T* dbeta);

}  // namespace reference

}  // namespace walnet::kernels
