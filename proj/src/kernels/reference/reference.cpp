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

// Serial reference kernels. Straight loops over the defining formulas; no
// im2col, no BLAS, no OpenMP.

#include <cstdint>

#include "walnet/kernels/kernels.hpp"

namespace walnet::kernels::reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          T acc = bias ? bias[o] : T(0);
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            for (std::size_t i = 0; i < g.kernel_h; ++i) {
              const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
              for (std::size_t j = 0; j < g.kernel_w; ++j) {
                const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                acc += w[((o * g.in_channels + c) * g.kernel_h + i) * g.kernel_w + j] *
                       x[((n * g.in_channels + c) * g.in_h + static_cast<std::size_t>(iy)) * g.in_w +
                         static_cast<std::size_t>(ix)];
              }
            }
          }
          y[((n * g.out_channels + o) * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* dbias) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const T d = dy[((n * g.out_channels + o) * oh + oy) * ow + ox];
          if (dbias) dbias[o] += d;
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            for (std::size_t i = 0; i < g.kernel_h; ++i) {
              const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
              for (std::size_t j = 0; j < g.kernel_w; ++j) {
                const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                const std::size_t wi = ((o * g.in_channels + c) * g.kernel_h + i) * g.kernel_w + j;
                const std::size_t xi = ((n * g.in_channels + c) * g.in_h + static_cast<std::size_t>(iy)) * g.in_w +
                                       static_cast<std::size_t>(ix);
                dw[wi] += x[xi] * d;
                if (dx) dx[xi] += w[wi] * d;
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool2x2_forward(const PlaneGeometry& g, const T* x, T* y, std::uint32_t* argmax) {
  const std::size_t oh = g.h / 2, ow = g.w / 2;
  for (std::size_t pl = 0; pl < g.batch * g.channels; ++pl) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = 2 * oy * g.w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t k = (2 * oy + dy) * g.w + 2 * ox + dx;
            if (x[pl * g.plane() + k] > x[pl * g.plane() + best]) best = k;
          }
        }
        y[pl * oh * ow + oy * ow + ox] = x[pl * g.plane() + best];
        argmax[pl * oh * ow + oy * ow + ox] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2x2_backward(const PlaneGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx) {
  const std::size_t out_plane = (g.h / 2) * (g.w / 2);
  for (std::size_t pl = 0; pl < g.batch * g.channels; ++pl) {
    for (std::size_t i = 0; i < out_plane; ++i) {
      dx[pl * g.plane() + argmax[pl * out_plane + i]] += dy[pl * out_plane + i];
    }
  }
}

template <typename T>
void channel_moments(const PlaneGeometry& g, const T* x, double* mean, double* var) {
  const double count = static_cast<double>(g.batch * g.plane());
  for (std::size_t c = 0; c < g.channels; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      for (std::size_t i = 0; i < g.plane(); ++i) sum += x[(n * g.channels + c) * g.plane() + i];
    }
    mean[c] = sum / count;
    for (std::size_t n = 0; n < g.batch; ++n) {
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const double d = x[(n * g.channels + c) * g.plane() + i] - mean[c];
        sq += d * d;
      }
    }
    var[c] = sq / count;
  }
}

template <typename T>
void batchnorm_apply(const PlaneGeometry& g, const T* x, const double* mean, const double* inv_std,
                     const T* gamma, const T* beta, T* y) {
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t c = 0; c < g.channels; ++c) {
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const std::size_t k = (n * g.channels + c) * g.plane() + i;
        y[k] = static_cast<T>(gamma[c] * ((x[k] - mean[c]) * inv_std[c]) + beta[c]);
      }
    }
  }
}

template <typename T>
void batchnorm_backward(const PlaneGeometry& g, const T* x, const double* mean,
                        const double* inv_std, const T* gamma, const T* dy, bool batch_stats,
                        T* dx, T* dgamma, T* dbeta) {
  const double count = static_cast<double>(g.batch * g.plane());
  for (std::size_t c = 0; c < g.channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const std::size_t k = (n * g.channels + c) * g.plane() + i;
        sum_dy += dy[k];
        sum_dy_xhat += dy[k] * (x[k] - mean[c]) * inv_std[c];
      }
    }
    dgamma[c] += static_cast<T>(sum_dy_xhat);
    dbeta[c] += static_cast<T>(sum_dy);
    if (!dx) continue;
    for (std::size_t n = 0; n < g.batch; ++n) {
      for (std::size_t i = 0; i < g.plane(); ++i) {
        const std::size_t k = (n * g.channels + c) * g.plane() + i;
        double v = dy[k];
        if (batch_stats) {
          const double xhat = (x[k] - mean[c]) * inv_std[c];
          v = v - sum_dy / count - xhat * sum_dy_xhat / count;
        }
        dx[k] += static_cast<T>(gamma[c] * inv_std[c] * v);
      }
    }
  }
}

#define WALNET_INSTANTIATE(T)                                                                     \
  template void conv2d_forward<T>(const ConvGeometry&, const T*, const T*, const T*, T*);         \
  template void conv2d_backward<T>(const ConvGeometry&, const T*, const T*, const T*, T*, T*, T*); \
  template void maxpool2x2_forward<T>(const PlaneGeometry&, const T*, T*, std::uint32_t*);        \
  template void maxpool2x2_backward<T>(const PlaneGeometry&, const T*, const std::uint32_t*, T*);  \
  template void channel_moments<T>(const PlaneGeometry&, const T*, double*, double*);             \
  template void batchnorm_apply<T>(const PlaneGeometry&, const T*, const double*, const double*,  \
                                   const T*, const T*, T*);                                       \
  template void batchnorm_backward<T>(const PlaneGeometry&, const T*, const double*,             \
                                      const double*, const T*, const T*, bool, T*, T*, T*);

WALNET_INSTANTIATE(float)
WALNET_INSTANTIATE(double)

#undef WALNET_INSTANTIATE

}  // namespace walnet::kernels::reference
