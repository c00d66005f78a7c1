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
#include <span>
#include <string>
#include <vector>

#include "jrn/errors.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

/// Velocity buffers for classical (heavy-ball) momentum SGD:
///   v <- momentum * v - learning_rate * g
///   p <- p + v
template <typename Scalar>
struct OptimizerState {
  Scalar learning_rate = Scalar(0);
  Scalar momentum = Scalar(0);
  std::vector<ConvParams<Scalar>> velocity;

  OptimizerState() = default;

  OptimizerState(std::span<ConvParams<Scalar>* const> params, Scalar lr, Scalar mom)
      : learning_rate(lr), momentum(mom) {
    if (!(lr >= Scalar(0))) throw ConfigError("learning rate must be nonnegative");
    if (!(mom >= Scalar(0) && mom < Scalar(1))) throw ConfigError("momentum must lie in [0, 1)");
    velocity.reserve(params.size());
    for (const auto* p : params) velocity.push_back(ConvParams<Scalar>::zeros_like(*p));
  }
};

template <typename Scalar>
void sgd_momentum_step(std::span<ConvParams<Scalar>* const> params,
                       std::span<const ConvParams<Scalar>* const> grads,
                       OptimizerState<Scalar>& state) {
  if (params.size() != grads.size() || params.size() != state.velocity.size()) {
    throw UsageError("sgd_momentum_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " +
                     std::to_string(state.velocity.size()) + " velocity buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    const auto& g = *grads[i];
    auto& v = state.velocity[i];
    if (!p.same_shape(g) || !p.same_shape(v)) {
      throw UsageError("sgd_momentum_step: shape mismatch at parameter " + std::to_string(i));
    }
    v.weights = state.momentum * v.weights - state.learning_rate * g.weights;
    v.bias = state.momentum * v.bias - state.learning_rate * g.bias;
    p.weights += v.weights;
    p.bias += v.bias;
  }
}

/// Rescales all gradients jointly so their global L2 norm is at most
/// max_norm. Returns the norm before rescaling. max_norm <= 0 disables.
template <typename Scalar>
double clip_gradient_norm(std::span<ConvParams<Scalar>* const> grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) {
    sq += g->weights.template cast<double>().square().sum() + g->bias.template cast<double>().square().sum();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const auto factor = static_cast<Scalar>(max_norm / norm);
    for (auto* g : grads) {
      g->weights *= factor;
      g->bias *= factor;
    }
  }
  return norm;
}

}  // namespace jrn
