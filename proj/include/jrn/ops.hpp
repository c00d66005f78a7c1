// Copyright 2026 The JRN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "jrn/errors.hpp"
#include "jrn/parallel.hpp"
#include "jrn/tensor.hpp"

// Forward and backward kernels for every layer the network uses. All
// reductions run in double and store back to Scalar; every output element is
// reduced in a fixed order, so results are bitwise independent of the worker
// count.

namespace jrn {

namespace detail {

using PlaneD = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Output rectangle for which the tap at offset (dy, dx) reads inside the
/// input under "same" zero padding.
struct TapWindow {
  Eigen::Index y0, x0, rows, cols;
  bool empty() const { return rows <= 0 || cols <= 0; }
};

inline TapWindow tap_window(Eigen::Index height, Eigen::Index width, Eigen::Index dy,
                            Eigen::Index dx) {
  const Eigen::Index y0 = std::max<Eigen::Index>(0, -dy);
  const Eigen::Index x0 = std::max<Eigen::Index>(0, -dx);
  const Eigen::Index y1 = std::min(height, height - dy);
  const Eigen::Index x1 = std::min(width, width - dx);
  return {y0, x0, y1 - y0, x1 - x0};
}

/// One axis of a half-pixel-center bilinear resampling.
struct AxisSample {
  Eigen::Index lo, hi;
  double frac;
};

inline std::vector<AxisSample> bilinear_axis(Eigen::Index in_size, Eigen::Index out_size) {
  std::vector<AxisSample> samples(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  for (Eigen::Index d = 0; d < out_size; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    const auto lo = static_cast<Eigen::Index>(std::floor(src));
    const auto hi = std::min(lo + 1, in_size - 1);
    samples[static_cast<std::size_t>(d)] = {lo, hi, src - static_cast<double>(lo)};
  }
  return samples;
}

}  // namespace detail

template <typename Scalar>
void check_conv_input(const Tensor<Scalar>& input, const ConvParams<Scalar>& params) {
  if (params.kernel != 1 && params.kernel != 3) {
    throw ConfigError("convolution kernel must be 1x1 or 3x3");
  }
  if (input.channels() != params.in_channels) {
    throw ConfigError("conv2d expects " + std::to_string(params.in_channels) +
                      " input channels, got " + input.shape_string());
  }
}

/// Stride-1 convolution with "same" zero padding.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const ConvParams<Scalar>& params) {
  check_conv_input(input, params);
  const Eigen::Index height = input.height();
  const Eigen::Index width = input.width();
  const Eigen::Index pad = params.kernel / 2;
  Tensor<Scalar> out(params.out_channels, height, width);

  parallel_for(params.out_channels, [&](Eigen::Index o) {
    detail::PlaneD acc = detail::PlaneD::Constant(height, width, static_cast<double>(params.bias[o]));
    for (Eigen::Index i = 0; i < params.in_channels; ++i) {
      const auto in = input.plane(i);
      for (Eigen::Index ky = 0; ky < params.kernel; ++ky) {
        for (Eigen::Index kx = 0; kx < params.kernel; ++kx) {
          const Eigen::Index dy = ky - pad;
          const Eigen::Index dx = kx - pad;
          const auto win = detail::tap_window(height, width, dy, dx);
          if (win.empty()) continue;
          const double w = static_cast<double>(params.weight(o, i, ky, kx));
          acc.block(win.y0, win.x0, win.rows, win.cols) +=
              w * in.block(win.y0 + dy, win.x0 + dx, win.rows, win.cols).template cast<double>();
        }
      }
    }
    out.plane(o) = acc.template cast<Scalar>();
  });
  return out;
}

/// Accumulates parameter gradients into `param_grad` (when non-null) and
/// returns the gradient with respect to `input`.
template <typename Scalar>
Tensor<Scalar> conv2d_backward(const Tensor<Scalar>& input, const ConvParams<Scalar>& params,
                               const Tensor<Scalar>& grad_out, ConvParams<Scalar>* param_grad) {
  check_conv_input(input, params);
  const Eigen::Index height = input.height();
  const Eigen::Index width = input.width();
  const Eigen::Index pad = params.kernel / 2;
  if (grad_out.channels() != params.out_channels || !grad_out.same_spatial(input)) {
    throw ShapeError("conv2d_backward: upstream gradient has shape " + grad_out.shape_string());
  }
  if (param_grad != nullptr && !param_grad->same_shape(params)) {
    throw UsageError("conv2d_backward: gradient buffer shape does not match parameters");
  }

  if (param_grad != nullptr) {
    parallel_for(params.out_channels, [&](Eigen::Index o) {
      const auto g = grad_out.plane(o);
      param_grad->bias[o] += static_cast<Scalar>(g.template cast<double>().sum());
      for (Eigen::Index i = 0; i < params.in_channels; ++i) {
        const auto in = input.plane(i);
        for (Eigen::Index ky = 0; ky < params.kernel; ++ky) {
          for (Eigen::Index kx = 0; kx < params.kernel; ++kx) {
            const Eigen::Index dy = ky - pad;
            const Eigen::Index dx = kx - pad;
            const auto win = detail::tap_window(height, width, dy, dx);
            if (win.empty()) continue;
            const double s =
                (g.block(win.y0, win.x0, win.rows, win.cols).template cast<double>() *
                 in.block(win.y0 + dy, win.x0 + dx, win.rows, win.cols).template cast<double>())
                    .sum();
            param_grad->weight(o, i, ky, kx) += static_cast<Scalar>(s);
          }
        }
      }
    });
  }

  Tensor<Scalar> grad_in(params.in_channels, height, width);
  parallel_for(params.in_channels, [&](Eigen::Index i) {
    detail::PlaneD acc = detail::PlaneD::Zero(height, width);
    for (Eigen::Index o = 0; o < params.out_channels; ++o) {
      const auto g = grad_out.plane(o);
      for (Eigen::Index ky = 0; ky < params.kernel; ++ky) {
        for (Eigen::Index kx = 0; kx < params.kernel; ++kx) {
          const Eigen::Index dy = ky - pad;
          const Eigen::Index dx = kx - pad;
          const auto win = detail::tap_window(height, width, dy, dx);
          if (win.empty()) continue;
          const double w = static_cast<double>(params.weight(o, i, ky, kx));
          acc.block(win.y0 + dy, win.x0 + dx, win.rows, win.cols) +=
              w * g.block(win.y0, win.x0, win.rows, win.cols).template cast<double>();
        }
      }
    }
    grad_in.plane(i) = acc.template cast<Scalar>();
  });
  return grad_in;
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input) {
  Tensor<Scalar> out = input;
  out.data() = input.data().max(Scalar(0));
  return out;
}

/// Subgradient 0 at input <= 0.
template <typename Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& grad_out) {
  if (!input.same_shape(grad_out)) throw ShapeError("relu_backward: shape mismatch");
  Tensor<Scalar> grad_in = grad_out;
  grad_in.data() = (input.data() > Scalar(0)).select(grad_out.data(), Scalar(0));
  return grad_in;
}

template <typename Scalar>
Tensor<Scalar> concat_channels(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (!a.same_spatial(b)) {
    throw ShapeError("concat_channels: spatial mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
  Tensor<Scalar> out(a.channels() + b.channels(), a.height(), a.width());
  out.data().head(a.size()) = a.data();
  out.data().tail(b.size()) = b.data();
  return out;
}

template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& t, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count <= 0 || begin + count > t.channels()) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + t.shape_string());
  }
  Tensor<Scalar> out(count, t.height(), t.width());
  out.data() = t.data().segment(begin * t.plane_size(), count * t.plane_size());
  return out;
}

template <typename Scalar>
Tensor<Scalar> add_elementwise(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add_elementwise: shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
  Tensor<Scalar> out = a;
  out.data() += b.data();
  return out;
}

/// Per-channel bilinear resampling with half-pixel centers:
/// src = (dst + 0.5) * in / out - 0.5, clamped to the valid range.
template <typename Scalar>
Tensor<Scalar> resize_bilinear(const Tensor<Scalar>& input, Eigen::Index out_height,
                               Eigen::Index out_width) {
  if (out_height < 1 || out_width < 1) throw ShapeError("resize_bilinear: empty target size");
  const auto ys = detail::bilinear_axis(input.height(), out_height);
  const auto xs = detail::bilinear_axis(input.width(), out_width);
  Tensor<Scalar> out(input.channels(), out_height, out_width);
  parallel_for(input.channels(), [&](Eigen::Index c) {
    const auto in = input.plane(c);
    auto dst = out.plane(c);
    for (Eigen::Index y = 0; y < out_height; ++y) {
      const auto& sy = ys[static_cast<std::size_t>(y)];
      for (Eigen::Index x = 0; x < out_width; ++x) {
        const auto& sx = xs[static_cast<std::size_t>(x)];
        const double a = in(sy.lo, sx.lo), b = in(sy.lo, sx.hi);
        const double c0 = in(sy.hi, sx.lo), d = in(sy.hi, sx.hi);
        const double top = a + sx.frac * (b - a);
        const double bottom = c0 + sx.frac * (d - c0);
        dst(y, x) = static_cast<Scalar>(top + sy.frac * (bottom - top));
      }
    }
  });
  return out;
}

template <typename Scalar>
Tensor<Scalar> resize_bilinear_backward(const Tensor<Scalar>& grad_out, Eigen::Index in_height,
                                        Eigen::Index in_width) {
  const auto ys = detail::bilinear_axis(in_height, grad_out.height());
  const auto xs = detail::bilinear_axis(in_width, grad_out.width());
  Tensor<Scalar> grad_in(grad_out.channels(), in_height, in_width);
  parallel_for(grad_out.channels(), [&](Eigen::Index c) {
    const auto g = grad_out.plane(c);
    detail::PlaneD acc = detail::PlaneD::Zero(in_height, in_width);
    for (Eigen::Index y = 0; y < grad_out.height(); ++y) {
      const auto& sy = ys[static_cast<std::size_t>(y)];
      for (Eigen::Index x = 0; x < grad_out.width(); ++x) {
        const auto& sx = xs[static_cast<std::size_t>(x)];
        const double v = g(y, x);
        acc(sy.lo, sx.lo) += v * (1.0 - sx.frac) * (1.0 - sy.frac);
        acc(sy.lo, sx.hi) += v * sx.frac * (1.0 - sy.frac);
        acc(sy.hi, sx.lo) += v * (1.0 - sx.frac) * sy.frac;
        acc(sy.hi, sx.hi) += v * sx.frac * sy.frac;
      }
    }
    grad_in.plane(c) = acc.template cast<Scalar>();
  });
  return grad_in;
}

/// Softmax over channels at every pixel, stabilized by the per-pixel maximum.
template <typename Scalar>
Tensor<Scalar> softmax_channels(const Tensor<Scalar>& logits) {
  const Eigen::Index k = logits.channels();
  const Eigen::Index n = logits.plane_size();
  Tensor<Scalar> out(k, logits.height(), logits.width());
  const auto& z = logits.data();
  auto& p = out.data();
  std::vector<double> e(static_cast<std::size_t>(k));
  for (Eigen::Index px = 0; px < n; ++px) {
    double zmax = z[px];
    for (Eigen::Index c = 1; c < k; ++c) zmax = std::max<double>(zmax, z[c * n + px]);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      e[static_cast<std::size_t>(c)] = std::exp(static_cast<double>(z[c * n + px]) - zmax);
      sum += e[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      p[c * n + px] = static_cast<Scalar>(e[static_cast<std::size_t>(c)] / sum);
    }
  }
  return out;
}

/// Given the softmax output s, returns s * (g - <g, s>) per pixel.
template <typename Scalar>
Tensor<Scalar> softmax_backward(const Tensor<Scalar>& probs, const Tensor<Scalar>& grad_out) {
  if (!probs.same_shape(grad_out)) throw ShapeError("softmax_backward: shape mismatch");
  const Eigen::Index k = probs.channels();
  const Eigen::Index n = probs.plane_size();
  Tensor<Scalar> grad_in = Tensor<Scalar>::zeros_like(probs);
  const auto& s = probs.data();
  const auto& g = grad_out.data();
  for (Eigen::Index px = 0; px < n; ++px) {
    double dot = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) dot += static_cast<double>(g[c * n + px]) * s[c * n + px];
    for (Eigen::Index c = 0; c < k; ++c) {
      grad_in.data()[c * n + px] =
          static_cast<Scalar>(static_cast<double>(s[c * n + px]) * (g[c * n + px] - dot));
    }
  }
  return grad_in;
}

template <typename Scalar>
Tensor<Scalar> clamp(const Tensor<Scalar>& input, Scalar lo, Scalar hi) {
  Tensor<Scalar> out = input;
  out.data() = input.data().max(lo).min(hi);
  return out;
}

}  // namespace jrn
