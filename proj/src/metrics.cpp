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

#include "jrn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "jrn/errors.hpp"

namespace jrn {

namespace {

void check_same_size(const Tensorf& t, const GroundTruth& gt, const char* what) {
  if (t.height() != gt.height() || t.width() != gt.width() || gt.mask.height() != gt.height() ||
      gt.mask.width() != gt.width()) {
    throw ShapeError(std::string(what) + " " + t.shape_string() + " does not match ground truth " +
                     gt.depth.shape_string());
  }
}

}  // namespace

void DepthMetricsAccumulator::add(const Tensorf& pred, const GroundTruth& gt) {
  check_same_size(pred, gt, "depth prediction");
  if (pred.channels() != 1) throw ShapeError("depth prediction must have one channel");
  const double thresholds[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};
  for (Eigen::Index y = 0; y < gt.height(); ++y) {
    for (Eigen::Index x = 0; x < gt.width(); ++x) {
      if (!gt.mask.valid(y, x)) continue;
      const double truth = gt.depth(0, y, x);
      const double raw = pred(0, y, x);
      if (!(truth > 0.0) || !std::isfinite(truth)) {
        throw DataError("nonpositive ground-truth depth at (" + std::to_string(y) + ", " +
                        std::to_string(x) + ")");
      }
      if (!(raw >= 0.0) || !std::isfinite(raw)) {
        throw DataError("invalid predicted depth at (" + std::to_string(y) + ", " +
                        std::to_string(x) + ")");
      }
      const double err = std::abs(truth - raw);
      abs_rel_ += err / truth;
      sqr_rel_ += err * err / truth;
      sq_ += err * err;
      const double guarded = std::max(raw, kMetricDepthFloor);
      log10_ += std::abs(std::log10(truth) - std::log10(guarded));
      const double dl = std::log(truth) - std::log(guarded);
      sq_log_ += dl * dl;
      const double ratio = std::max(truth / guarded, guarded / truth);
      for (int t = 0; t < 3; ++t) within_[t] += ratio < thresholds[t] ? 1 : 0;
      ++count_;
    }
  }
}

DepthMetrics DepthMetricsAccumulator::result() const {
  if (count_ == 0) throw DataError("depth metrics over zero valid pixels");
  const double n = static_cast<double>(count_);
  return {abs_rel_ / n,
          sqr_rel_ / n,
          log10_ / n,
          std::sqrt(sq_ / n),
          std::sqrt(sq_log_ / n),
          static_cast<double>(within_[0]) / n,
          static_cast<double>(within_[1]) / n,
          static_cast<double>(within_[2]) / n};
}

SegMetricsAccumulator::SegMetricsAccumulator(int num_classes)
    : k_(num_classes), confusion_(decltype(confusion_)::Zero(num_classes, num_classes)) {
  if (num_classes < 1) throw ConfigError("segmentation metrics need at least one class");
}

LabelMap argmax_labels(const Tensorf& probs) {
  LabelMap labels(probs.height(), probs.width());
  for (Eigen::Index y = 0; y < probs.height(); ++y) {
    for (Eigen::Index x = 0; x < probs.width(); ++x) {
      std::int32_t best = 0;
      for (Eigen::Index c = 1; c < probs.channels(); ++c) {
        if (probs(c, y, x) > probs(best, y, x)) best = static_cast<std::int32_t>(c);
      }
      labels(y, x) = best;
    }
  }
  return labels;
}

void SegMetricsAccumulator::add(const Tensorf& pred_probs, const GroundTruth& gt) {
  check_same_size(pred_probs, gt, "semantic prediction");
  if (pred_probs.channels() != k_) {
    throw ShapeError("semantic prediction has " + std::to_string(pred_probs.channels()) +
                     " channels, expected " + std::to_string(k_));
  }
  add_labels(argmax_labels(pred_probs), gt);
}

void SegMetricsAccumulator::add_labels(const LabelMap& predicted, const GroundTruth& gt) {
  if (predicted.rows() != gt.height() || predicted.cols() != gt.width()) {
    throw ShapeError("predicted label map does not match ground truth");
  }
  for (Eigen::Index y = 0; y < gt.height(); ++y) {
    for (Eigen::Index x = 0; x < gt.width(); ++x) {
      if (!gt.mask.valid(y, x)) continue;
      const auto truth = gt.labels(y, x);
      const auto guess = predicted(y, x);
      if (truth < 0 || truth >= k_ || guess < 0 || guess >= k_) {
        throw DataError("label outside [0, " + std::to_string(k_) + ") at (" + std::to_string(y) +
                        ", " + std::to_string(x) + ")");
      }
      ++confusion_(truth, guess);
    }
  }
}

SegMetrics SegMetricsAccumulator::result() const {
  const std::int64_t total = confusion_.sum();
  if (total == 0) throw DataError("segmentation metrics over zero valid pixels");
  SegMetrics out;
  out.per_class_iou.assign(static_cast<std::size_t>(k_), std::numeric_limits<double>::quiet_NaN());
  double iou_sum = 0.0;
  int present = 0;
  for (int c = 0; c < k_; ++c) {
    const std::int64_t inter = confusion_(c, c);
    const std::int64_t uni = confusion_.row(c).sum() + confusion_.col(c).sum() - inter;
    if (uni == 0) continue;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    out.per_class_iou[static_cast<std::size_t>(c)] = iou;
    iou_sum += iou;
    ++present;
  }
  out.mean_iou = iou_sum / present;
  out.pixel_accuracy =
      static_cast<double>(confusion_.matrix().trace()) / static_cast<double>(total);
  return out;
}

DepthMetrics depth_metrics(const Tensorf& pred, const GroundTruth& gt) {
  DepthMetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.result();
}

SegMetrics seg_metrics(const Tensorf& pred_probs, const GroundTruth& gt) {
  SegMetricsAccumulator acc(static_cast<int>(pred_probs.channels()));
  acc.add(pred_probs, gt);
  return acc.result();
}

MetricReport evaluate_predictions(const std::vector<PredictionPair<float>>& predictions,
                                  const std::vector<Sample>& samples) {
  if (predictions.size() != samples.size() || samples.empty()) {
    throw UsageError("evaluate_predictions: " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(samples.size()) + " samples");
  }
  DepthMetricsAccumulator depth;
  SegMetricsAccumulator seg(static_cast<int>(predictions.front().semantics.channels()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    depth.add(predictions[i].depth, samples[i].truth);
    seg.add(predictions[i].semantics, samples[i].truth);
  }
  return {depth.result(), seg.result()};
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string metric_csv_header(int num_classes) {
  std::string h =
      "variant,rel,rel_sqr,log10,rms_linear,rms_log,delta1,delta2,delta3,mean_iou,pixel_accuracy";
  for (int c = 0; c < num_classes; ++c) h += ",iou_" + std::to_string(c);
  return h;
}

std::string metric_csv_row(const std::string& name, const MetricReport& r) {
  std::string row = name;
  for (double v : {r.depth.rel, r.depth.rel_sqr, r.depth.log10, r.depth.rms_linear,
                   r.depth.rms_log, r.depth.delta1, r.depth.delta2, r.depth.delta3,
                   r.seg.mean_iou, r.seg.pixel_accuracy}) {
    row += "," + format_real(v);
  }
  for (double v : r.seg.per_class_iou) row += "," + format_real(v);
  return row;
}

}  // namespace jrn
