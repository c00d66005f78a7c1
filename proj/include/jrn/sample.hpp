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

#include <cstdint>
#include <string>

#include "jrn/tensor.hpp"

namespace jrn {

using LabelMap = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Pixels that carry both a depth and a semantic ground truth value.
struct ValidMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> valid;

  static ValidMask all(Eigen::Index height, Eigen::Index width) {
    return {decltype(valid)::Constant(height, width, true)};
  }

  Eigen::Index count() const { return valid.count(); }
  Eigen::Index height() const { return valid.rows(); }
  Eigen::Index width() const { return valid.cols(); }
};

struct GroundTruth {
  Tensorf depth;   // 1 x H x W, meters, > 0 on valid pixels
  LabelMap labels; // H x W, class index in [0, k)
  ValidMask mask;

  Eigen::Index height() const { return depth.height(); }
  Eigen::Index width() const { return depth.width(); }
};

/// Depth in meters (1 x H x W) and a per-pixel class distribution (k x H x W).
template <typename Scalar>
struct PredictionPair {
  Tensor<Scalar> depth;
  Tensor<Scalar> semantics;
};

/// One scene: the single-modality predictions fed to the network and the
/// ground truth they are scored against.
struct Sample {
  std::string id;
  PredictionPair<float> input;
  GroundTruth truth;
};

}  // namespace jrn
