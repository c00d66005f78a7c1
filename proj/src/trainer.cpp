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

#include "jrn/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "jrn/losses.hpp"
#include "jrn/optimizer.hpp"
#include "jrn/random.hpp"

namespace jrn {

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = count; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

JointLossValue loss_and_gradient(const JrnNetwork<float>& net, const Sample& sample,
                                 JrnNetwork<float>& grad) {
  for (auto* layer : grad.layers()) {
    layer->weights.setZero();
    layer->bias.setZero();
  }
  Tape<float> tape;
  const auto graph = jrn_graph(tape, net, sample.input.depth, sample.input.semantics, &grad);
  const Tape<float>::Var depth_var{graph.depth};
  const Tape<float>::Var logits_var{graph.logits};
  auto depth = depth_loss_with_grad(tape.value(depth_var), sample.truth);
  auto sem = semantic_loss_with_grad(tape.value(logits_var), sample.truth);
  const JointLossValue loss{depth.value, sem.value};
  if (!std::isfinite(loss.total())) return loss;
  tape.backward({{depth_var, std::move(depth.grad)}, {logits_var, std::move(sem.grad)}});
  return loss;
}

std::vector<LossRecord> train(JrnNetwork<float>& net, const std::vector<Sample>& dataset,
                              const TrainOptions& options, const TrainObserver& observer) {
  if (dataset.empty()) throw UsageError("train: dataset is empty");
  if (options.epochs < 0) throw UsageError("train: negative epoch count");
  if (!(options.max_gradient_norm >= 0.0)) throw ConfigError("train: gradient norm ceiling must be >= 0");
  for (const auto& s : dataset) {
    if (s.truth.mask.count() < 1) {
      throw DataError("sample '" + s.id + "' has no valid pixels");
    }
  }
  const std::uint64_t seed = options.shuffle_seed.value_or(net.config.rng_seed);
  auto params = net.layers();
  auto grad = net.zeros_like();
  auto grad_layers = grad.layers();
  const std::vector<const ConvParams<float>*> grad_view(grad_layers.begin(), grad_layers.end());
  OptimizerState<float> state(params, options.effective_learning_rate(), options.momentum);

  std::vector<LossRecord> trace;
  trace.reserve(dataset.size() * static_cast<std::size_t>(options.epochs));
  std::int64_t iteration = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (const std::size_t idx : epoch_order(dataset.size(), seed, epoch)) {
      const Sample& sample = dataset[idx];
      const auto loss = loss_and_gradient(net, sample, grad);
      if (!std::isfinite(loss.total())) {
        std::ostringstream msg;
        msg << "non-finite loss at iteration " << iteration << " (epoch " << epoch << ", sample '"
            << sample.id << "'): depth=" << loss.depth << " semantic=" << loss.semantic;
        throw TrainingError(msg.str());
      }
      const double norm = clip_gradient_norm<float>(grad_layers, options.max_gradient_norm);
      sgd_momentum_step<float>(params, grad_view, state);
      trace.push_back({iteration, epoch, sample.id, loss, norm});
      if (observer) observer(trace.back());
      ++iteration;
    }
  }
  return trace;
}

}  // namespace jrn
