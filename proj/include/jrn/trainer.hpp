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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jrn/losses.hpp"
#include "jrn/model.hpp"
#include "jrn/sample.hpp"

namespace jrn {

struct TrainOptions {
  int epochs = 1;
  float base_learning_rate = 0.001f;
  float learning_rate_scale = 5.0f;
  float momentum = 0.9f;
  /// Global gradient-norm ceiling applied before each step; 0 disables.
  double max_gradient_norm = 0.0;
  /// Seed for the per-epoch sample order; defaults to the network's seed.
  std::optional<std::uint64_t> shuffle_seed;

  float effective_learning_rate() const { return base_learning_rate * learning_rate_scale; }
};

struct LossRecord {
  std::int64_t iteration = 0;
  int epoch = 0;
  std::string sample_id;
  JointLossValue loss;
  double gradient_norm = 0.0;  // before clipping
};

/// Callback invoked after every iteration; handy for progress logging.
using TrainObserver = std::function<void(const LossRecord&)>;

/// Batch-size-one momentum SGD on the joint loss. Each epoch visits the
/// dataset in a seeded Fisher-Yates order. The loss is evaluated on the raw
/// depth head output (no clamp) and on the semantic logits. Updates `net` in
/// place and returns one record per iteration.
std::vector<LossRecord> train(JrnNetwork<float>& net, const std::vector<Sample>& dataset,
                              const TrainOptions& options, const TrainObserver& observer = {});

/// One forward/backward pass; returns the loss and fills `grad` (which must
/// be shaped like `net`; it is overwritten).
JointLossValue loss_and_gradient(const JrnNetwork<float>& net, const Sample& sample,
                                 JrnNetwork<float>& grad);

/// Epoch order used by train(); exposed for tests.
std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, int epoch);

}  // namespace jrn
