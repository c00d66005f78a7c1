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
#include <vector>

#include "jrn/sample.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

/// Lower bound applied to predicted depth before log- and ratio-based
/// metrics; the network's output clamp allows exact zeros.
inline constexpr double kMetricDepthFloor = 1e-3;

struct DepthMetrics {
  double rel = 0.0;
  double rel_sqr = 0.0;
  double log10 = 0.0;
  double rms_linear = 0.0;
  double rms_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

struct SegMetrics {
  /// NaN for classes absent from both prediction and ground truth.
  std::vector<double> per_class_iou;
  double mean_iou = 0.0;
  double pixel_accuracy = 0.0;
};

struct MetricReport {
  DepthMetrics depth;
  SegMetrics seg;
};

/// Pools per-pixel depth errors over any number of images.
class DepthMetricsAccumulator {
 public:
  void add(const Tensorf& pred, const GroundTruth& gt);
  DepthMetrics result() const;
  std::int64_t count() const { return count_; }

 private:
  std::int64_t count_ = 0;
  double abs_rel_ = 0.0;
  double sqr_rel_ = 0.0;
  double log10_ = 0.0;
  double sq_ = 0.0;
  double sq_log_ = 0.0;
  std::int64_t within_[3] = {0, 0, 0};
};

/// Pools a k x k confusion matrix (rows: ground truth, cols: prediction).
class SegMetricsAccumulator {
 public:
  explicit SegMetricsAccumulator(int num_classes);
  void add(const Tensorf& pred_probs, const GroundTruth& gt);
  void add_labels(const LabelMap& predicted, const GroundTruth& gt);
  SegMetrics result() const;
  const Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>& confusion() const {
    return confusion_;
  }

 private:
  int k_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> confusion_;
};

/// Argmax over channels, ties to the lowest class index.
LabelMap argmax_labels(const Tensorf& probs);

DepthMetrics depth_metrics(const Tensorf& pred, const GroundTruth& gt);
SegMetrics seg_metrics(const Tensorf& pred_probs, const GroundTruth& gt);

/// Metrics of a whole evaluation split, pooled over all valid pixels.
MetricReport evaluate_predictions(const std::vector<PredictionPair<float>>& predictions,
                                  const std::vector<Sample>& samples);

/// "variant,rel,rel_sqr,...,pixel_accuracy,iou_0,...,iou_{k-1}".
std::string metric_csv_header(int num_classes);
std::string metric_csv_row(const std::string& name, const MetricReport& report);

/// Shortest round-trippable-at-6-digits text for a real ("%.6g").
std::string format_real(double value);

}  // namespace jrn
