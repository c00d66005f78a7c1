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

#include <algorithm>
#include <cmath>
#include <string>

#include "jrn/errors.hpp"
#include "jrn/sample.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

/// Loss value together with its gradient w.r.t. the prediction it consumed.
template <typename Scalar>
struct LossGrad {
  double value = 0.0;
  Tensor<Scalar> grad;
};

struct JointLossValue {
  double depth = 0.0;
  double semantic = 0.0;
  double total() const { return depth + semantic; }
};

namespace detail {

inline Eigen::Index valid_count_or_throw(const GroundTruth& gt) {
  if (gt.mask.height() != gt.height() || gt.mask.width() != gt.width()) {
    throw ShapeError("ground truth mask does not match depth map");
  }
  const Eigen::Index n = gt.mask.count();
  if (n < 1) throw DataError("ground truth has no valid pixels");
  return n;
}

template <typename Scalar>
void check_depth_inputs(const Tensor<Scalar>& pred, const GroundTruth& gt) {
  if (pred.channels() != 1 || pred.height() != gt.height() || pred.width() != gt.width()) {
    throw ShapeError("depth prediction " + pred.shape_string() + " vs ground truth " +
                     gt.depth.shape_string());
  }
}

template <typename Scalar>
void check_logit_inputs(const Tensor<Scalar>& logits, const GroundTruth& gt) {
  if (logits.height() != gt.height() || logits.width() != gt.width() ||
      gt.labels.rows() != gt.height() || gt.labels.cols() != gt.width()) {
    throw ShapeError("semantic logits " + logits.shape_string() + " vs ground truth " +
                     gt.depth.shape_string());
  }
}

/// Visits valid pixels in row-major order; the order is fixed so sums are
/// bitwise reproducible and independent of invalid pixels.
template <typename Fn>
void for_each_valid(const GroundTruth& gt, Fn&& fn) {
  const Eigen::Index w = gt.width();
  for (Eigen::Index y = 0; y < gt.height(); ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (gt.mask.valid(y, x)) fn(y, x, y * w + x);
    }
  }
}

}  // namespace detail

/// Mean over valid pixels of (D' - D*)^2 / D*.
template <typename Scalar>
LossGrad<Scalar> depth_loss_with_grad(const Tensor<Scalar>& pred, const GroundTruth& gt) {
  detail::check_depth_inputs(pred, gt);
  const Eigen::Index n = detail::valid_count_or_throw(gt);
  const double inv_n = 1.0 / static_cast<double>(n);
  LossGrad<Scalar> out{0.0, Tensor<Scalar>::zeros_like(pred)};
  detail::for_each_valid(gt, [&](Eigen::Index y, Eigen::Index x, Eigen::Index px) {
    const double target = gt.depth(0, y, x);
    if (!(target > 0.0)) {
      throw DataError("nonpositive ground-truth depth at valid pixel (" + std::to_string(y) + ", " +
                      std::to_string(x) + ")");
    }
    const double diff = static_cast<double>(pred.data()[px]) - target;
    out.value += diff * diff / target;
    out.grad.data()[px] = static_cast<Scalar>(2.0 * diff / target * inv_n);
  });
  out.value *= inv_n;
  return out;
}

template <typename Scalar>
double depth_loss(const Tensor<Scalar>& pred, const GroundTruth& gt) {
  return depth_loss_with_grad(pred, gt).value;
}

/// Cross-entropy of softmax(logits) against the labels, averaged over valid
/// pixels. Uses log-sum-exp on the raw logits.
template <typename Scalar>
LossGrad<Scalar> semantic_loss_with_grad(const Tensor<Scalar>& logits, const GroundTruth& gt) {
  detail::check_logit_inputs(logits, gt);
  const Eigen::Index n = detail::valid_count_or_throw(gt);
  const Eigen::Index k = logits.channels();
  const Eigen::Index plane = logits.plane_size();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossGrad<Scalar> out{0.0, Tensor<Scalar>::zeros_like(logits)};
  const auto& z = logits.data();
  detail::for_each_valid(gt, [&](Eigen::Index y, Eigen::Index x, Eigen::Index px) {
    const auto label = gt.labels(y, x);
    if (label < 0 || label >= k) {
      throw DataError("label " + std::to_string(label) + " at (" + std::to_string(y) + ", " +
                      std::to_string(x) + ") outside [0, " + std::to_string(k) + ")");
    }
    double zmax = z[px];
    for (Eigen::Index c = 1; c < k; ++c) zmax = std::max<double>(zmax, z[c * plane + px]);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(static_cast<double>(z[c * plane + px]) - zmax);
    const double log_norm = zmax + std::log(sum);
    out.value += log_norm - static_cast<double>(z[label * plane + px]);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double prob = std::exp(static_cast<double>(z[c * plane + px]) - log_norm);
      const double target = c == label ? 1.0 : 0.0;
      out.grad.data()[c * plane + px] = static_cast<Scalar>((prob - target) * inv_n);
    }
  });
  out.value *= inv_n;
  return out;
}

template <typename Scalar>
double semantic_loss(const Tensor<Scalar>& logits, const GroundTruth& gt) {
  return semantic_loss_with_grad(logits, gt).value;
}

/// Unweighted sum of the depth and semantic terms.
template <typename Scalar>
JointLossValue joint_loss(const Tensor<Scalar>& depth_pred, const Tensor<Scalar>& logits,
                          const GroundTruth& gt) {
  return {depth_loss(depth_pred, gt), semantic_loss(logits, gt)};
}

}  // namespace jrn
