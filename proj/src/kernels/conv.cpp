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

#include <algorithm>
#include <vector>

#include "blas.hpp"
#include "walnet/kernels/kernels.hpp"

namespace walnet::kernels {

namespace {

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel_h == 1 && g.kernel_w == 1 && g.stride == 1 && g.pad == 0;
}

// col[(c*kh + i)*kw + j][oy*ow + ox] = x[c][oy*s + i - pad][ox*s + j - pad]
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const auto oh = static_cast<std::ptrdiff_t>(g.out_h());
  const auto ow = static_cast<std::ptrdiff_t>(g.out_w());
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h);
  const auto iw = static_cast<std::ptrdiff_t>(g.in_w);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  const auto p = static_cast<std::ptrdiff_t>(g.pad);
  const auto rows = static_cast<std::ptrdiff_t>(g.patch());
  const auto kh = static_cast<std::ptrdiff_t>(g.kernel_h);
  const auto kw = static_cast<std::ptrdiff_t>(g.kernel_w);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const std::ptrdiff_t c = r / (kh * kw);
    const std::ptrdiff_t i = (r / kw) % kh;
    const std::ptrdiff_t j = r % kw;
    const T* plane = x + c * ih * iw;
    T* out = col + r * oh * ow;
    for (std::ptrdiff_t oy = 0; oy < oh; ++oy) {
      const std::ptrdiff_t y = oy * s + i - p;
      T* dst = out + oy * ow;
      if (y < 0 || y >= ih) {
        std::fill(dst, dst + ow, T(0));
        continue;
      }
      const T* src = plane + y * iw;
      if (s == 1) {
        // valid ox range: 0 <= ox + j - p < iw
        const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(p - j, 0, ow);
        const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(iw + p - j, lo, ow);
        std::fill(dst, dst + lo, T(0));
        std::copy(src + lo + j - p, src + hi + j - p, dst + lo);
        std::fill(dst + hi, dst + ow, T(0));
      } else {
        for (std::ptrdiff_t ox = 0; ox < ow; ++ox) {
          const std::ptrdiff_t xx = ox * s + j - p;
          dst[ox] = (xx >= 0 && xx < iw) ? src[xx] : T(0);
        }
      }
    }
  }
}

// Scatter-add of im2col's inverse. Each thread owns whole input channels.
template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, T* dx) {
  const auto oh = static_cast<std::ptrdiff_t>(g.out_h());
  const auto ow = static_cast<std::ptrdiff_t>(g.out_w());
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h);
  const auto iw = static_cast<std::ptrdiff_t>(g.in_w);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  const auto p = static_cast<std::ptrdiff_t>(g.pad);
  const auto kh = static_cast<std::ptrdiff_t>(g.kernel_h);
  const auto kw = static_cast<std::ptrdiff_t>(g.kernel_w);
  const auto channels = static_cast<std::ptrdiff_t>(g.in_channels);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    T* plane = dx + c * ih * iw;
    for (std::ptrdiff_t i = 0; i < kh; ++i) {
      for (std::ptrdiff_t j = 0; j < kw; ++j) {
        const T* src = col + ((c * kh + i) * kw + j) * oh * ow;
        for (std::ptrdiff_t oy = 0; oy < oh; ++oy) {
          const std::ptrdiff_t y = oy * s + i - p;
          if (y < 0 || y >= ih) continue;
          T* dst = plane + y * iw;
          const T* row = src + oy * ow;
          if (s == 1) {
            const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(p - j, 0, ow);
            const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(iw + p - j, lo, ow);
            const std::ptrdiff_t shift = j - p;
#pragma omp simd
            for (std::ptrdiff_t ox = lo; ox < hi; ++ox) dst[ox + shift] += row[ox];
            continue;
          }
          for (std::ptrdiff_t ox = 0; ox < ow; ++ox) {
            const std::ptrdiff_t xx = ox * s + j - p;
            if (xx >= 0 && xx < iw) dst[xx] += row[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y) {
  const std::size_t out_plane = g.out_h() * g.out_w();
  const std::size_t in_image = g.in_channels * g.in_h * g.in_w;
  const std::size_t out_image = g.out_channels * out_plane;
  const bool pointwise = is_pointwise(g);
  std::vector<T> col(pointwise ? 0 : g.patch() * out_plane);

  for (std::size_t n = 0; n < g.batch; ++n) {
    const T* xn = x + n * in_image;
    T* yn = y + n * out_image;
    const T* b = xn;
    if (!pointwise) {
      im2col(g, xn, col.data());
      b = col.data();
    }
    T beta = T(0);
    if (bias) {
      const auto oc = static_cast<std::ptrdiff_t>(g.out_channels);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t o = 0; o < oc; ++o) {
        std::fill(yn + o * out_plane, yn + (o + 1) * out_plane, bias[o]);
      }
      beta = T(1);
    }
    detail::gemm(false, false, g.out_channels, out_plane, g.patch(), T(1), w, g.patch(), b,
                 out_plane, beta, yn, out_plane);
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* dbias) {
  const std::size_t out_plane = g.out_h() * g.out_w();
  const std::size_t in_image = g.in_channels * g.in_h * g.in_w;
  const std::size_t out_image = g.out_channels * out_plane;
  const bool pointwise = is_pointwise(g);
  std::vector<T> col(pointwise ? 0 : g.patch() * out_plane);
  std::vector<T> dcol(pointwise || !dx ? 0 : g.patch() * out_plane);

  for (std::size_t n = 0; n < g.batch; ++n) {
    const T* xn = x + n * in_image;
    const T* dyn = dy + n * out_image;
    const T* b = xn;
    if (!pointwise) {
      im2col(g, xn, col.data());
      b = col.data();
    }
    // dW += dY * col^T
    detail::gemm(false, true, g.out_channels, g.patch(), out_plane, T(1), dyn, out_plane, b,
                 out_plane, T(1), dw, g.patch());
    if (dx) {
      T* dxn = dx + n * in_image;
      if (pointwise) {
        detail::gemm(true, false, g.patch(), out_plane, g.out_channels, T(1), w, g.patch(), dyn,
                     out_plane, T(1), dxn, out_plane);
      } else {
        detail::gemm(true, false, g.patch(), out_plane, g.out_channels, T(1), w, g.patch(), dyn,
                     out_plane, T(0), dcol.data(), out_plane);
        col2im_add(g, dcol.data(), dxn);
      }
    }
  }

  if (dbias) {
    const auto oc = static_cast<std::ptrdiff_t>(g.out_channels);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t o = 0; o < oc; ++o) {
      double acc = 0.0;
      for (std::size_t n = 0; n < g.batch; ++n) {
        const T* row = dy + n * out_image + static_cast<std::size_t>(o) * out_plane;
        for (std::size_t i = 0; i < out_plane; ++i) acc += row[i];
      }
      dbias[o] += static_cast<T>(acc);
    }
  }
}

template void conv2d_forward<float>(const ConvGeometry&, const float*, const float*, const float*, float*);
template void conv2d_forward<double>(const ConvGeometry&, const double*, const double*, const double*, double*);
template void conv2d_backward<float>(const ConvGeometry&, const float*, const float*, const float*, float*,
                                     float*, float*);
template void conv2d_backward<double>(const ConvGeometry&, const double*, const double*, const double*,
                                      double*, double*, double*);

}  // namespace walnet::kernels
