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

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jrn/errors.hpp"
#include "jrn/random.hpp"
#include "jrn/sample.hpp"
#include "jrn/tape.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

enum class FusionOp : std::uint32_t { Concatenate = 0, Sum = 1 };

inline constexpr float kMaxDepth = 10.0f;
/// Depth enters the branches divided by the depth range.
inline constexpr float kDepthInputScale = 1.0f / kMaxDepth;

/// Architecture of a joint refinement network. Valid configurations are
/// exactly the five named variants (cat60, sum60, cat10, cat5, cat1); the
/// class count and seed are free.
struct JrnConfig {
  FusionOp fusion = FusionOp::Sum;
  int post_fusion_channels = 20;   // C0
  int branch_output_channels = 60; // C
  int num_classes = 5;             // k
  std::vector<int> scale_divisors = {8, 4, 2};
  int branch_feature_channels = 20;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError unless the config is one of the five variants.
  void validate() const;

  /// Lowercase variant name ("sum60", ...). Validates first.
  std::string variant_name() const;

  static JrnConfig variant(std::string_view name, std::uint64_t seed = 0, int num_classes = 5);
  static const std::vector<std::string>& variant_names();

  friend bool operator==(const JrnConfig&, const JrnConfig&) = default;
};

/// Closed-form trainable parameter count of the network described by config.
std::int64_t param_count(const JrnConfig& config);

/// Layers of one scale branch: a 3x3 conv per modality into the shared
/// feature width, fusion, then two 3x3 convs down to C channels.
template <typename Scalar>
struct ScaleBranch {
  ConvParams<Scalar> depth_in;
  ConvParams<Scalar> sem_in;
  ConvParams<Scalar> fuse;
  ConvParams<Scalar> refine;
};

template <typename Scalar>
struct JrnNetwork {
  JrnConfig config;
  std::vector<ScaleBranch<Scalar>> branches;
  ConvParams<Scalar> merge;
  ConvParams<Scalar> depth_head;
  ConvParams<Scalar> sem_head;

  /// Allocates zero-valued layers for `cfg` (no random init).
  static JrnNetwork zeros(const JrnConfig& cfg) {
    cfg.validate();
    const int f = cfg.branch_feature_channels;
    const int c = cfg.branch_output_channels;
    const int k = cfg.num_classes;
    const int c0 = cfg.fusion == FusionOp::Sum ? f : 2 * f;
    const int merged = c * static_cast<int>(cfg.scale_divisors.size());
    JrnNetwork net;
    net.config = cfg;
    for (std::size_t s = 0; s < cfg.scale_divisors.size(); ++s) {
      net.branches.push_back({ConvParams<Scalar>(f, 1, 3), ConvParams<Scalar>(f, k, 3),
                              ConvParams<Scalar>(c, c0, 3), ConvParams<Scalar>(c, c, 3)});
    }
    net.merge = ConvParams<Scalar>(merged, merged, 3);
    net.depth_head = ConvParams<Scalar>(1, merged, 1);
    net.sem_head = ConvParams<Scalar>(k, merged, 1);
    return net;
  }

  JrnNetwork zeros_like() const { return zeros(config); }

  /// All layers in declaration order: per branch (depth_in, sem_in, fuse,
  /// refine), then merge, depth_head, sem_head. Checkpoints use this order.
  std::vector<ConvParams<Scalar>*> layers() {
    std::vector<ConvParams<Scalar>*> out;
    for (auto& b : branches) {
      out.insert(out.end(), {&b.depth_in, &b.sem_in, &b.fuse, &b.refine});
    }
    out.insert(out.end(), {&merge, &depth_head, &sem_head});
    return out;
  }

  std::vector<const ConvParams<Scalar>*> layers() const {
    auto mut = const_cast<JrnNetwork*>(this)->layers();
    return {mut.begin(), mut.end()};
  }

  std::vector<std::string> layer_names() const {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < branches.size(); ++s) {
      const std::string p = "scale" + std::to_string(s) + ".";
      names.insert(names.end(), {p + "depth_in", p + "sem_in", p + "fuse", p + "refine"});
    }
    names.insert(names.end(), {"merge", "depth_head", "sem_head"});
    return names;
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto* layer : layers()) n += layer->parameter_count();
    return n;
  }

  template <typename Other>
  JrnNetwork<Other> cast() const {
    auto out = JrnNetwork<Other>::zeros(config);
    auto dst = out.layers();
    auto src = layers();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<Other>();
    return out;
  }

  friend bool operator==(const JrnNetwork& a, const JrnNetwork& b) {
    if (!(a.config == b.config)) return false;
    auto la = a.layers();
    auto lb = b.layers();
    for (std::size_t i = 0; i < la.size(); ++i) {
      if (!(*la[i] == *lb[i])) return false;
    }
    return true;
  }
};

/// Random init: weights ~ N(0, 2 / fan_in), biases zero. Layer i draws from
/// its own stream derive_seed(rng_seed, i), so variants built from one seed
/// share every layer whose shape they share.
template <typename Scalar = float>
JrnNetwork<Scalar> build_jrn(const JrnConfig& config) {
  auto net = JrnNetwork<Scalar>::zeros(config);
  auto layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& layer = *layers[i];
    Rng rng(derive_seed(config.rng_seed, i));
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in_channels * layer.taps()));
    for (Eigen::Index j = 0; j < layer.weights.size(); ++j) {
      layer.weights[j] = static_cast<Scalar>(rng.normal(0.0, stddev));
    }
  }
  return net;
}

/// Tape handles of the two raw head outputs at full resolution.
struct JrnGraph {
  std::size_t depth = 0;  // unclamped depth, 1 x H x W
  std::size_t logits = 0; // semantic logits, k x H x W
};

template <typename Scalar>
void check_jrn_inputs(const JrnConfig& config, const Tensor<Scalar>& depth,
                      const Tensor<Scalar>& sem) {
  if (depth.channels() != 1) {
    throw ShapeError("depth input must have 1 channel, got " + depth.shape_string());
  }
  if (sem.channels() != config.num_classes) {
    throw ShapeError("semantic input must have " + std::to_string(config.num_classes) +
                     " channels, got " + sem.shape_string());
  }
  if (!depth.same_spatial(sem)) {
    throw ShapeError("depth " + depth.shape_string() + " and semantic " + sem.shape_string() +
                     " inputs differ in size");
  }
  if (depth.height() % 8 != 0 || depth.width() % 8 != 0) {
    throw ShapeError("input size " + std::to_string(depth.height()) + "x" +
                     std::to_string(depth.width()) + " is not divisible by 8");
  }
}

/// Records one scale branch on the tape. Inputs must already be resampled to
/// the branch scale.
template <typename Scalar>
typename Tape<Scalar>::Var scale_branch_graph(Tape<Scalar>& tape, typename Tape<Scalar>::Var depth_in,
                                              typename Tape<Scalar>::Var sem_in,
                                              const ScaleBranch<Scalar>& branch, FusionOp fusion,
                                              ScaleBranch<Scalar>* grad = nullptr) {
  auto d = tape.relu(tape.conv2d(depth_in, branch.depth_in, grad ? &grad->depth_in : nullptr));
  auto s = tape.relu(tape.conv2d(sem_in, branch.sem_in, grad ? &grad->sem_in : nullptr));
  auto fused = fusion == FusionOp::Sum ? tape.add(d, s) : tape.concat(d, s);
  auto h = tape.relu(tape.conv2d(fused, branch.fuse, grad ? &grad->fuse : nullptr));
  return tape.relu(tape.conv2d(h, branch.refine, grad ? &grad->refine : nullptr));
}

template <typename Scalar>
Tensor<Scalar> scale_branch_forward(const Tensor<Scalar>& depth_in, const Tensor<Scalar>& sem_in,
                                    const ScaleBranch<Scalar>& branch, const JrnConfig& config) {
  if (depth_in.channels() != 1 || sem_in.channels() != config.num_classes ||
      !depth_in.same_spatial(sem_in)) {
    throw ShapeError("scale branch inputs " + depth_in.shape_string() + " and " +
                     sem_in.shape_string() + " do not match the configuration");
  }
  Tape<Scalar> tape;
  auto out = scale_branch_graph(tape, tape.input(depth_in), tape.input(sem_in), branch,
                                config.fusion);
  return tape.value(out);
}

/// Records the full network on the tape: scale the depth input to [0, 1],
/// resample inputs to every branch scale, run the branches, bring their
/// outputs to the finest branch scale, concatenate, merge conv, 1x1 heads,
/// and upsample both heads to H x W.
/// Parameter gradients go to `grad` when given.
template <typename Scalar>
JrnGraph jrn_graph(Tape<Scalar>& tape, const JrnNetwork<Scalar>& net, const Tensor<Scalar>& depth,
                   const Tensor<Scalar>& sem, JrnNetwork<Scalar>* grad = nullptr) {
  using Var = typename Tape<Scalar>::Var;
  check_jrn_inputs(net.config, depth, sem);
  const Eigen::Index height = depth.height();
  const Eigen::Index width = depth.width();
  const int finest = net.config.scale_divisors.back();
  const Eigen::Index merge_h = height / finest;
  const Eigen::Index merge_w = width / finest;

  const Var depth_raw = tape.input(depth);
  const Var sem_var = tape.input(sem);
  const Var depth_var = tape.scale(depth_raw, Scalar(kDepthInputScale));
  std::vector<Var> outputs;
  for (std::size_t s = 0; s < net.branches.size(); ++s) {
    const int div = net.config.scale_divisors[s];
    const Eigen::Index h = height / div;
    const Eigen::Index w = width / div;
    auto out = scale_branch_graph(tape, tape.resize(depth_var, h, w), tape.resize(sem_var, h, w),
                                  net.branches[s], net.config.fusion,
                                  grad ? &grad->branches[s] : nullptr);
    if (h != merge_h || w != merge_w) out = tape.resize(out, merge_h, merge_w);
    outputs.push_back(out);
  }
  Var merged = outputs.front();
  for (std::size_t s = 1; s < outputs.size(); ++s) merged = tape.concat(merged, outputs[s]);
  merged = tape.relu(tape.conv2d(merged, net.merge, grad ? &grad->merge : nullptr));
  auto depth_out = tape.conv2d(merged, net.depth_head, grad ? &grad->depth_head : nullptr);
  auto logits_out = tape.conv2d(merged, net.sem_head, grad ? &grad->sem_head : nullptr);
  return {tape.resize(depth_out, height, width).index, tape.resize(logits_out, height, width).index};
}

/// Refined predictions: depth clamped to [0, 10] m, semantics = softmax of
/// the logits.
template <typename Scalar>
PredictionPair<Scalar> jrn_forward(const JrnNetwork<Scalar>& net, const Tensor<Scalar>& depth,
                                   const Tensor<Scalar>& sem) {
  Tape<Scalar> tape;
  const auto graph = jrn_graph(tape, net, depth, sem);
  return {clamp(tape.value({graph.depth}), Scalar(0), Scalar(kMaxDepth)),
          softmax_channels(tape.value({graph.logits}))};
}

}  // namespace jrn
