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

#include "walnet/ad/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <initializer_list>

#include "walnet/kernels/kernels.hpp"
#include "walnet/util/error.hpp"

namespace walnet::ad {

namespace {

std::atomic<KernelBackend> g_backend{KernelBackend::kParallel};

bool use_reference() { return g_backend.load(std::memory_order_relaxed) == KernelBackend::kReference; }

template <typename T>
Tensor<T> make_output(Shape shape, const char* op, std::initializer_list<const Tensor<T>*> inputs) {
  auto node = std::make_shared<Node<T>>();
  node->value.resize(numel(shape));
  node->shape = std::move(shape);
  node->op = op;
  bool needs = false;
  if (grad_enabled()) {
    for (const Tensor<T>* in : inputs) needs = needs || (*in && in->requires_grad());
  }
  node->requires_grad = needs;
  if (needs) {
    for (const Tensor<T>* in : inputs) {
      if (*in) node->inputs.push_back(in->node_ptr());
    }
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void check_finite(const Tensor<T>& t) {
  // v - v is 0 for finite v and NaN otherwise, so one reduction finds any NaN or Inf.
  const T* v = t.values().data();
  const std::size_t n = t.numel();
  T acc = T(0);
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += v[i] - v[i];
  if (!std::isfinite(acc)) {
    throw NumericError(fmt::format("{}: non-finite value in output of shape {}", t.op(),
                                   to_string(t.shape())));
  }
}

// Gradient sink for an input that does not require grad.
template <typename T>
T* grad_or_null(Node<T>& n) {
  return n.requires_grad ? n.grad.data() : nullptr;
}

// Splits [N, C, H, W] / [C, H, W] into batch and channel counts.
struct Nchw {
  std::size_t n, c, h, w;
  bool batched;
};

template <typename T>
Nchw nchw(const Tensor<T>& x, const char* op) {
  if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), true};
  if (x.rank() == 3) return {1, x.dim(0), x.dim(1), x.dim(2), false};
  throw ShapeError(fmt::format("{}: expected [N, C, H, W] or [C, H, W] input, got {}", op,
                               to_string(x.shape())));
}

}  // namespace

void set_kernel_backend(KernelBackend backend) { g_backend.store(backend); }
KernelBackend kernel_backend() { return g_backend.load(); }

template <typename T>
BatchNormState<T> BatchNormState<T>::create(std::size_t channels) {
  BatchNormState s;
  s.gamma = Tensor<T>::full({channels}, T(1), true);
  s.beta = Tensor<T>::zeros({channels}, true);
  s.running_mean.assign(channels, T(0));
  s.running_var.assign(channels, T(1));
  return s;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& filters, const Tensor<T>& bias,
                 std::size_t stride, std::size_t pad) {
  const Nchw in = nchw(x, "conv2d");
  if (filters.rank() != 4) {
    throw ShapeError("conv2d: filters must be [O, C, kh, kw], got " + to_string(filters.shape()));
  }
  if (filters.dim(1) != in.c) {
    throw ShapeError(fmt::format("conv2d: input has {} channels but filters expect {}", in.c,
                                 filters.dim(1)));
  }
  if (stride < 1) throw InvalidArgument("conv2d: stride must be >= 1");
  kernels::ConvGeometry g{in.n, in.c, in.h, in.w, filters.dim(0), filters.dim(2), filters.dim(3),
                          stride, pad};
  if (in.h + 2 * pad < g.kernel_h) {
    throw ShapeError(fmt::format("conv2d: input height {} (+2*pad {}) is smaller than kernel height {}",
                                 in.h, pad, g.kernel_h));
  }
  if (in.w + 2 * pad < g.kernel_w) {
    throw ShapeError(fmt::format("conv2d: input width {} (+2*pad {}) is smaller than kernel width {}",
                                 in.w, pad, g.kernel_w));
  }
  if (bias && (bias.rank() != 1 || bias.dim(0) != g.out_channels)) {
    throw ShapeError(fmt::format("conv2d: bias must be [{}], got {}", g.out_channels,
                                 to_string(bias.shape())));
  }

  Shape out_shape = in.batched ? Shape{g.batch, g.out_channels, g.out_h(), g.out_w()}
                               : Shape{g.out_channels, g.out_h(), g.out_w()};
  Tensor<T> y = make_output<T>(std::move(out_shape), "conv2d", {&x, &filters, &bias});
  const T* b = bias ? bias.values().data() : nullptr;
  if (use_reference()) {
    kernels::reference::conv2d_forward(g, x.values().data(), filters.values().data(), b,
                                       y.mutable_values().data());
  } else {
    kernels::conv2d_forward(g, x.values().data(), filters.values().data(), b,
                            y.mutable_values().data());
  }
  check_finite(y);

  if (y.requires_grad()) {
    const bool has_bias = static_cast<bool>(bias);
    y.node().backward = [g, has_bias](Node<T>& self) {
      Node<T>& xn = *self.inputs[0];
      Node<T>& wn = *self.inputs[1];
      std::vector<T> scratch;
      T* dw = wn.grad.data();
      if (!wn.requires_grad) {
        scratch.assign(wn.value.size(), T(0));
        dw = scratch.data();
      }
      T* db = has_bias ? grad_or_null(*self.inputs[2]) : nullptr;
      if (use_reference()) {
        kernels::reference::conv2d_backward(g, xn.value.data(), wn.value.data(), self.grad.data(),
                                            grad_or_null(xn), dw, db);
      } else {
        kernels::conv2d_backward(g, xn.value.data(), wn.value.data(), self.grad.data(),
                                 grad_or_null(xn), dw, db);
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& x, BatchNormState<T>& state, Mode mode) {
  const Nchw in = nchw(x, "batchnorm2d");
  if (in.c != state.channels()) {
    throw ShapeError(fmt::format("batchnorm2d: input has {} channels, state has {}", in.c,
                                 state.channels()));
  }
  if (!(state.eps > 0)) throw InvalidArgument("batchnorm2d: eps must be positive");
  const kernels::PlaneGeometry g{in.n, in.c, in.h, in.w};
  std::vector<double> mean(in.c), inv_std(in.c);

  if (mode == Mode::kTrain) {
    std::vector<double> var(in.c);
    if (use_reference()) {
      kernels::reference::channel_moments(g, x.values().data(), mean.data(), var.data());
    } else {
      kernels::channel_moments(g, x.values().data(), mean.data(), var.data());
    }
    const double count = static_cast<double>(in.n * in.h * in.w);
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    for (std::size_t c = 0; c < in.c; ++c) {
      inv_std[c] = 1.0 / std::sqrt(var[c] + state.eps);
      state.running_mean[c] = static_cast<T>((1 - state.momentum) * state.running_mean[c] +
                                             state.momentum * mean[c]);
      state.running_var[c] = static_cast<T>((1 - state.momentum) * state.running_var[c] +
                                            state.momentum * var[c] * unbias);
    }
    ++state.updates;
  } else {
    if (!state.initialized()) {
      throw Error("batchnorm2d: eval mode requested but running statistics are uninitialized");
    }
    for (std::size_t c = 0; c < in.c; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(static_cast<double>(state.running_var[c]) + state.eps);
    }
  }

  Tensor<T> y = make_output<T>(x.shape(), "batchnorm2d", {&x, &state.gamma, &state.beta});
  if (use_reference()) {
    kernels::reference::batchnorm_apply(g, x.values().data(), mean.data(), inv_std.data(),
                                        state.gamma.values().data(), state.beta.values().data(),
                                        y.mutable_values().data());
  } else {
    kernels::batchnorm_apply(g, x.values().data(), mean.data(), inv_std.data(),
                             state.gamma.values().data(), state.beta.values().data(),
                             y.mutable_values().data());
  }
  check_finite(y);

  if (y.requires_grad()) {
    const bool batch_stats = mode == Mode::kTrain;
    y.node().backward = [g, mean = std::move(mean), inv_std = std::move(inv_std),
                         batch_stats](Node<T>& self) {
      Node<T>& xn = *self.inputs[0];
      Node<T>& gn = *self.inputs[1];
      Node<T>& bn = *self.inputs[2];
      std::vector<T> dg(g.channels, T(0)), db(g.channels, T(0));
      if (use_reference()) {
        kernels::reference::batchnorm_backward(g, xn.value.data(), mean.data(), inv_std.data(),
                                               gn.value.data(), self.grad.data(), batch_stats,
                                               grad_or_null(xn), dg.data(), db.data());
      } else {
        kernels::batchnorm_backward(g, xn.value.data(), mean.data(), inv_std.data(),
                                    gn.value.data(), self.grad.data(), batch_stats,
                                    grad_or_null(xn), dg.data(), db.data());
      }
      if (gn.requires_grad) {
        for (std::size_t c = 0; c < g.channels; ++c) gn.grad[c] += dg[c];
      }
      if (bn.requires_grad) {
        for (std::size_t c = 0; c < g.channels; ++c) bn.grad[c] += db[c];
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x) {
  if (x.rank() < 2) throw ShapeError("maxpool2d: input needs at least two axes");
  const std::size_t h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
  if (h < 2) throw ShapeError(fmt::format("maxpool2d: height {} is below the 2x2 window", h));
  if (w < 2) throw ShapeError(fmt::format("maxpool2d: width {} is below the 2x2 window", w));
  const std::size_t planes = x.numel() / (h * w);
  const kernels::PlaneGeometry g{planes, 1, h, w};

  Shape out_shape = x.shape();
  out_shape[x.rank() - 2] = h / 2;
  out_shape[x.rank() - 1] = w / 2;
  Tensor<T> y = make_output<T>(std::move(out_shape), "maxpool2d", {&x});
  std::vector<std::uint32_t> argmax(y.numel());
  if (use_reference()) {
    kernels::reference::maxpool2x2_forward(g, x.values().data(), y.mutable_values().data(), argmax.data());
  } else {
    kernels::maxpool2x2_forward(g, x.values().data(), y.mutable_values().data(), argmax.data());
  }
  check_finite(y);

  if (y.requires_grad()) {
    y.node().backward = [g, argmax = std::move(argmax)](Node<T>& self) {
      Node<T>& xn = *self.inputs[0];
      if (use_reference()) {
        kernels::reference::maxpool2x2_backward(g, self.grad.data(), argmax.data(), xn.grad.data());
      } else {
        kernels::maxpool2x2_backward(g, self.grad.data(), argmax.data(), xn.grad.data());
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> activation(const Tensor<T>& x, Activation kind) {
  const bool is_relu = kind == Activation::kRelu;
  Tensor<T> y = make_output<T>(x.shape(), is_relu ? "relu" : "sigmoid", {&x});
  const std::size_t n = x.numel();
  if (is_relu) {
    kernels::relu_forward(n, x.values().data(), y.mutable_values().data());
  } else {
    kernels::sigmoid_forward(n, x.values().data(), y.mutable_values().data());
  }
  check_finite(y);
  if (y.requires_grad()) {
    y.node().backward = [is_relu, n](Node<T>& self) {
      Node<T>& xn = *self.inputs[0];
      if (is_relu) {
        kernels::relu_backward(n, xn.value.data(), self.grad.data(), xn.grad.data());
      } else {
        kernels::sigmoid_backward(n, self.value.data(), self.grad.data(), xn.grad.data());
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> global_pool(const Tensor<T>& x, Pooling kind) {
  if (x.rank() < 2) throw ShapeError("global_pool: expected [N, C, ...] input");
  const std::size_t rows = x.dim(0) * x.dim(1);
  const std::size_t span = x.numel() / rows;
  if (span == 0) throw ShapeError("global_pool: nothing to pool over");
  Tensor<T> y = make_output<T>({x.dim(0), x.dim(1)}, kind == Pooling::kAvg ? "avg_pool" : "max_pool", {&x});
  auto out = y.mutable_values();
  const auto in = x.values();
  std::vector<std::size_t> argmax;
  if (kind == Pooling::kAvg) {
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < span; ++k) acc += in[r * span + k];
      out[r] = static_cast<T>(acc / static_cast<double>(span));
    }
  } else {
    argmax.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < span; ++k) {
        if (in[r * span + k] > in[r * span + best]) best = k;
      }
      argmax[r] = best;
      out[r] = in[r * span + best];
    }
  }
  check_finite(y);
  if (y.requires_grad()) {
    y.node().backward = [rows, span, argmax = std::move(argmax)](Node<T>& self) {
      Node<T>& xn = *self.inputs[0];
      for (std::size_t r = 0; r < rows; ++r) {
        if (argmax.empty()) {
          const T g = self.grad[r] / static_cast<T>(span);
          for (std::size_t k = 0; k < span; ++k) xn.grad[r * span + k] += g;
        } else {
          xn.grad[r * span + argmax[r]] += self.grad[r];
        }
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& p, std::span<const T> targets) {
  if (p.numel() != targets.size()) {
    throw ShapeError(fmt::format("bce_loss: {} predictions but {} targets", p.numel(), targets.size()));
  }
  if (targets.empty()) throw ShapeError("bce_loss: empty input");
  for (T t : targets) {
    if (t != T(0) && t != T(1)) throw InvalidArgument("bce_loss: targets must be 0 or 1");
  }
  Tensor<T> loss = make_output<T>({}, "bce_loss", {&p});
  const auto pv = p.values();
  const double count = static_cast<double>(pv.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double q = std::clamp(static_cast<double>(pv[i]), kBceClamp, 1.0 - kBceClamp);
    acc += targets[i] == T(1) ? -std::log(q) : -std::log(1.0 - q);
  }
  loss.mutable_values()[0] = static_cast<T>(acc / count);
  check_finite(loss);
  if (loss.requires_grad()) {
    std::vector<T> y(targets.begin(), targets.end());
    loss.node().backward = [y = std::move(y), count](Node<T>& self) {
      Node<T>& pn = *self.inputs[0];
      const double up = self.grad[0];
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double q = std::clamp(static_cast<double>(pn.value[i]), kBceClamp, 1.0 - kBceClamp);
        pn.grad[i] += static_cast<T>(up * (q - y[i]) / (q * (1.0 - q)) / count);
      }
    };
  }
  return loss;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  Tensor<T> y = make_output<T>({}, "sum", {&x});
  double acc = 0.0;
  for (T v : x.values()) acc += v;
  y.mutable_values()[0] = static_cast<T>(acc);
  check_finite(y);
  if (y.requires_grad()) {
    y.node().backward = [](Node<T>& self) {
      for (auto& g : self.inputs[0]->grad) g += self.grad[0];
    };
  }
  return y;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  Tensor<T> y = make_output<T>({}, "mean", {&x});
  double acc = 0.0;
  for (T v : x.values()) acc += v;
  const double n = static_cast<double>(x.numel());
  y.mutable_values()[0] = static_cast<T>(acc / n);
  check_finite(y);
  if (y.requires_grad()) {
    y.node().backward = [n](Node<T>& self) {
      const T g = static_cast<T>(self.grad[0] / n);
      for (auto& v : self.inputs[0]->grad) v += g;
    };
  }
  return y;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("add: shapes {} and {} differ", to_string(a.shape()), to_string(b.shape())));
  }
  Tensor<T> y = make_output<T>(a.shape(), "add", {&a, &b});
  auto out = y.mutable_values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  check_finite(y);
  if (y.requires_grad()) {
    auto an = a.node_ptr(), bn = b.node_ptr();
    y.node().backward = [an, bn](Node<T>& self) {
      for (Node<T>* in : {an.get(), bn.get()}) {
        if (!in->requires_grad) continue;
        for (std::size_t i = 0; i < self.grad.size(); ++i) in->grad[i] += self.grad[i];
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("mul: shapes {} and {} differ", to_string(a.shape()), to_string(b.shape())));
  }
  Tensor<T> y = make_output<T>(a.shape(), "mul", {&a, &b});
  auto out = y.mutable_values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  check_finite(y);
  if (y.requires_grad()) {
    auto an = a.node_ptr(), bn = b.node_ptr();
    y.node().backward = [an, bn](Node<T>& self) {
      // a and b may be the same node (x * x); both contributions accumulate.
      if (an->requires_grad) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i] * an->value[i];
      }
    };
  }
  return y;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ShapeError(fmt::format("reshape: cannot view {} as {}", to_string(x.shape()), to_string(shape)));
  }
  Tensor<T> y = make_output<T>(std::move(shape), "reshape", {&x});
  std::copy(x.values().begin(), x.values().end(), y.mutable_values().begin());
  if (y.requires_grad()) {
    y.node().backward = [](Node<T>& self) {
      Node<T>& in = *self.inputs[0];
      for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
    };
  }
  return y;
}

#define WALNET_INSTANTIATE(T)                                                                    \
  template struct BatchNormState<T>;                                                             \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, \
                               std::size_t);                                                     \
  template Tensor<T> batchnorm2d<T>(const Tensor<T>&, BatchNormState<T>&, Mode);                 \
  template Tensor<T> maxpool2d<T>(const Tensor<T>&);                                             \
  template Tensor<T> activation<T>(const Tensor<T>&, Activation);                                \
  template Tensor<T> global_pool<T>(const Tensor<T>&, Pooling);                                  \
  template Tensor<T> bce_loss<T>(const Tensor<T>&, std::span<const T>);                          \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                   \
  template Tensor<T> mean<T>(const Tensor<T>&);                                                  \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);

WALNET_INSTANTIATE(float)
WALNET_INSTANTIATE(double)

#undef WALNET_INSTANTIATE

}  // namespace walnet::ad
