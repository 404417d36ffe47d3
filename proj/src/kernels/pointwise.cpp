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
#include <cmath>

#include "walnet/kernels/kernels.hpp"

namespace walnet::kernels {

template <typename T>
void maxpool2x2_forward(const PlaneGeometry& g, const T* x, T* y, std::uint32_t* argmax) {
  const std::size_t oh = g.h / 2, ow = g.w / 2;
  const auto planes = static_cast<std::ptrdiff_t>(g.batch * g.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pl = 0; pl < planes; ++pl) {
    const T* src = x + static_cast<std::size_t>(pl) * g.plane();
    T* dst = y + static_cast<std::size_t>(pl) * oh * ow;
    std::uint32_t* idx = argmax + static_cast<std::size_t>(pl) * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t base = 2 * oy * g.w + 2 * ox;
        const std::size_t cand[4] = {base, base + 1, base + g.w, base + g.w + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k) {
          if (src[cand[k]] > src[best]) best = cand[k];
        }
        dst[oy * ow + ox] = src[best];
        idx[oy * ow + ox] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2x2_backward(const PlaneGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx) {
  const std::size_t out_plane = (g.h / 2) * (g.w / 2);
  const auto planes = static_cast<std::ptrdiff_t>(g.batch * g.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pl = 0; pl < planes; ++pl) {
    const T* src = dy + static_cast<std::size_t>(pl) * out_plane;
    const std::uint32_t* idx = argmax + static_cast<std::size_t>(pl) * out_plane;
    T* dst = dx + static_cast<std::size_t>(pl) * g.plane();
    for (std::size_t i = 0; i < out_plane; ++i) dst[idx[i]] += src[i];
  }
}

template <typename T>
void channel_moments(const PlaneGeometry& g, const T* x, double* mean, double* var) {
  const auto channels = static_cast<std::ptrdiff_t>(g.channels);
  const double count = static_cast<double>(g.batch * g.plane());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      const T* p = x + (n * g.channels + static_cast<std::size_t>(c)) * g.plane();
#pragma omp simd reduction(+ : sum)
      for (std::size_t i = 0; i < g.plane(); ++i) sum += p[i];
    }
    const double mu = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      const T* p = x + (n * g.channels + static_cast<std::size_t>(c)) * g.plane();
#pragma omp simd reduction(+ : sq)
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const double d = p[i] - mu;
        sq += d * d;
      }
    }
    mean[c] = mu;
    var[c] = sq / count;
  }
}

template <typename T>
void batchnorm_apply(const PlaneGeometry& g, const T* x, const double* mean, const double* inv_std,
                     const T* gamma, const T* beta, T* y) {
  const auto planes = static_cast<std::ptrdiff_t>(g.batch * g.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pl = 0; pl < planes; ++pl) {
    const std::size_t c = static_cast<std::size_t>(pl) % g.channels;
    const T scale = static_cast<T>(gamma[c] * inv_std[c]);
    const T shift = static_cast<T>(beta[c] - gamma[c] * inv_std[c] * mean[c]);
    const T* src = x + static_cast<std::size_t>(pl) * g.plane();
    T* dst = y + static_cast<std::size_t>(pl) * g.plane();
    for (std::size_t i = 0; i < g.plane(); ++i) dst[i] = scale * src[i] + shift;
  }
}

template <typename T>
void batchnorm_backward(const PlaneGeometry& g, const T* x, const double* mean,
                        const double* inv_std, const T* gamma, const T* dy, bool batch_stats,
                        T* dx, T* dgamma, T* dbeta) {
  const auto channels = static_cast<std::ptrdiff_t>(g.channels);
  const double count = static_cast<double>(g.batch * g.plane());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t cc = 0; cc < channels; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    const double mu = mean[c];
    const double is = inv_std[c];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      const T* xp = x + (n * g.channels + c) * g.plane();
      const T* dyp = dy + (n * g.channels + c) * g.plane();
#pragma omp simd reduction(+ : sum_dy, sum_dy_xhat)
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const double xhat = (xp[i] - mu) * is;
        sum_dy += dyp[i];
        sum_dy_xhat += dyp[i] * xhat;
      }
    }
    dgamma[c] += static_cast<T>(sum_dy_xhat);
    dbeta[c] += static_cast<T>(sum_dy);
    if (!dx) continue;
    const double k = gamma[c] * is;
    const double mean_dy = batch_stats ? sum_dy / count : 0.0;
    const double mean_dy_xhat = batch_stats ? sum_dy_xhat / count : 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      const std::size_t off = (n * g.channels + c) * g.plane();
      const T* xp = x + off;
      const T* dyp = dy + off;
      T* dxp = dx + off;
#pragma omp simd
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const double xhat = (xp[i] - mu) * is;
        dxp[i] += static_cast<T>(k * (dyp[i] - mean_dy - xhat * mean_dy_xhat));
      }
    }
  }
}

template <typename T>
void relu_forward(std::size_t n, const T* x, T* y) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) dx[i] += x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void sigmoid_forward(std::size_t n, const T* x, T* y) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    // Split by sign so exp never overflows.
    if (x[i] >= T(0)) {
      y[i] = T(1) / (T(1) + std::exp(-x[i]));
    } else {
      const T e = std::exp(x[i]);
      y[i] = e / (T(1) + e);
    }
  }
}

template <typename T>
void sigmoid_backward(std::size_t n, const T* y, const T* dy, T* dx) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
}

#define WALNET_INSTANTIATE(T)                                                                    \
  template void maxpool2x2_forward<T>(const PlaneGeometry&, const T*, T*, std::uint32_t*);       \
  template void maxpool2x2_backward<T>(const PlaneGeometry&, const T*, const std::uint32_t*, T*); \
  template void channel_moments<T>(const PlaneGeometry&, const T*, double*, double*);            \
  template void batchnorm_apply<T>(const PlaneGeometry&, const T*, const double*, const double*, \
                                   const T*, const T*, T*);                                      \
  template void batchnorm_backward<T>(const PlaneGeometry&, const T*, const double*,            \
                                      const double*, const T*, const T*, bool, T*, T*, T*);      \
  template void relu_forward<T>(std::size_t, const T*, T*);                                      \
  template void relu_backward<T>(std::size_t, const T*, const T*, T*);                           \
  template void sigmoid_forward<T>(std::size_t, const T*, T*);                                   \
  template void sigmoid_backward<T>(std::size_t, const T*, const T*, T*);

WALNET_INSTANTIATE(float)
WALNET_INSTANTIATE(double)

#undef WALNET_INSTANTIATE

}  // namespace walnet::kernels
