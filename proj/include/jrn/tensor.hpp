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

#include <cstddef>
#include <string>

#include "jrn/errors.hpp"

namespace jrn {

/// Dense channels x height x width array. Storage is channel-major, then row,
/// then column; each channel is exposed as a row-major Eigen plane.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneMap = Eigen::Map<Plane>;
  using ConstPlaneMap = Eigen::Map<const Plane>;

  Tensor() = default;

  Tensor(Eigen::Index channels, Eigen::Index height, Eigen::Index width)
      : channels_(channels), height_(height), width_(width),
        data_(Vector::Zero(checked_size(channels, height, width))) {}

  Tensor(Eigen::Index channels, Eigen::Index height, Eigen::Index width, Scalar fill)
      : channels_(channels), height_(height), width_(width),
        data_(Vector::Constant(checked_size(channels, height, width), fill)) {}

  static Tensor zeros_like(const Tensor& other) {
    return Tensor(other.channels(), other.height(), other.width());
  }

  Eigen::Index channels() const noexcept { return channels_; }
  Eigen::Index height() const noexcept { return height_; }
  Eigen::Index width() const noexcept { return width_; }
  Eigen::Index size() const noexcept { return data_.size(); }
  Eigen::Index plane_size() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return data_.size() == 0; }

  bool same_shape(const Tensor& other) const noexcept {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }
  bool same_spatial(const Tensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  Scalar& operator()(Eigen::Index c, Eigen::Index y, Eigen::Index x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  Scalar operator()(Eigen::Index c, Eigen::Index y, Eigen::Index x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  PlaneMap plane(Eigen::Index c) {
    return PlaneMap(data_.data() + c * plane_size(), height_, width_);
  }
  ConstPlaneMap plane(Eigen::Index c) const {
    return ConstPlaneMap(data_.data() + c * plane_size(), height_, width_);
  }

  Vector& data() noexcept { return data_; }
  const Vector& data() const noexcept { return data_; }

  bool all_finite() const { return data_.isFinite().all(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(channels_, height_, width_);
    out.data() = data_.template cast<Other>();
    return out;
  }

  std::string shape_string() const {
    return std::to_string(channels_) + "x" + std::to_string(height_) + "x" +
           std::to_string(width_);
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && (a.data_ == b.data_).all();
  }

 private:
  static Eigen::Index checked_size(Eigen::Index c, Eigen::Index h, Eigen::Index w) {
    if (c <= 0 || h <= 0 || w <= 0) {
      throw ShapeError("tensor dimensions must be positive, got " + std::to_string(c) + "x" +
                       std::to_string(h) + "x" + std::to_string(w));
    }
    return c * h * w;
  }

  Eigen::Index channels_ = 0;
  Eigen::Index height_ = 0;
  Eigen::Index width_ = 0;
  Vector data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

/// Weights and bias of one convolution layer. Weights are laid out
/// out x in x k x k, row-major, with k in {1, 3}.
template <typename Scalar>
struct ConvParams {
  using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Eigen::Index out_channels = 0;
  Eigen::Index in_channels = 0;
  Eigen::Index kernel = 0;
  Vector weights;
  Vector bias;

  ConvParams() = default;
  ConvParams(Eigen::Index out, Eigen::Index in, Eigen::Index k)
      : out_channels(out), in_channels(in), kernel(k) {
    if (k != 1 && k != 3) {
      throw ConfigError("convolution kernel must be 1x1 or 3x3, got " + std::to_string(k) + "x" +
                        std::to_string(k));
    }
    if (out <= 0 || in <= 0) throw ConfigError("convolution channel counts must be positive");
    weights = Vector::Zero(out * in * k * k);
    bias = Vector::Zero(out);
  }

  static ConvParams zeros_like(const ConvParams& other) {
    return ConvParams(other.out_channels, other.in_channels, other.kernel);
  }

  Eigen::Index taps() const noexcept { return kernel * kernel; }
  Eigen::Index parameter_count() const noexcept { return weights.size() + bias.size(); }

  Scalar& weight(Eigen::Index o, Eigen::Index i, Eigen::Index ky, Eigen::Index kx) {
    return weights[((o * in_channels + i) * kernel + ky) * kernel + kx];
  }
  Scalar weight(Eigen::Index o, Eigen::Index i, Eigen::Index ky, Eigen::Index kx) const {
    return weights[((o * in_channels + i) * kernel + ky) * kernel + kx];
  }

  bool same_shape(const ConvParams& other) const noexcept {
    return out_channels == other.out_channels && in_channels == other.in_channels &&
           kernel == other.kernel;
  }

  template <typename Other>
  ConvParams<Other> cast() const {
    ConvParams<Other> out(out_channels, in_channels, kernel);
    out.weights = weights.template cast<Other>();
    out.bias = bias.template cast<Other>();
    return out;
  }

  friend bool operator==(const ConvParams& a, const ConvParams& b) {
    return a.same_shape(b) && (a.weights == b.weights).all() && (a.bias == b.bias).all();
  }
};

}  // namespace jrn
