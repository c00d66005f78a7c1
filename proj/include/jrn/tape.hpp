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

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "jrn/errors.hpp"
#include "jrn/ops.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

/// Records a forward computation and replays it in reverse to produce exact
/// gradients. Parameters are referenced, not copied: the ConvParams passed to
/// conv2d() and their gradient buffers must outlive the tape.
template <typename Scalar>
class Tape {
 public:
  struct Var {
    std::size_t index = 0;
  };
  using Seed = std::pair<Var, Tensor<Scalar>>;

  Var input(Tensor<Scalar> value) { return push(std::move(value), nullptr); }

  /// Gradients w.r.t. `params` are accumulated into `param_grad` if given.
  Var conv2d(Var x, const ConvParams<Scalar>& params, ConvParams<Scalar>* param_grad = nullptr) {
    const auto& in = value(x);
    auto out = jrn::conv2d(in, params);
    const auto* p = &params;
    return push(std::move(out), [x, p, param_grad](Tape& tape, const Tensor<Scalar>& g) {
      tape.accumulate(x, conv2d_backward(tape.value(x), *p, g, param_grad));
    });
  }

  Var relu(Var x) {
    return push(jrn::relu(value(x)), [x](Tape& tape, const Tensor<Scalar>& g) {
      tape.accumulate(x, relu_backward(tape.value(x), g));
    });
  }

  /// Multiplication by a constant.
  Var scale(Var x, Scalar factor) {
    Tensor<Scalar> out = value(x);
    out.data() *= factor;
    return push(std::move(out), [x, factor](Tape& tape, const Tensor<Scalar>& g) {
      Tensor<Scalar> gx = g;
      gx.data() *= factor;
      tape.accumulate(x, std::move(gx));
    });
  }

  Var concat(Var a, Var b) {
    const Eigen::Index ca = value(a).channels();
    const Eigen::Index cb = value(b).channels();
    return push(concat_channels(value(a), value(b)),
                [a, b, ca, cb](Tape& tape, const Tensor<Scalar>& g) {
                  tape.accumulate(a, slice_channels(g, 0, ca));
                  tape.accumulate(b, slice_channels(g, ca, cb));
                });
  }

  Var add(Var a, Var b) {
    return push(add_elementwise(value(a), value(b)), [a, b](Tape& tape, const Tensor<Scalar>& g) {
      tape.accumulate(a, g);
      tape.accumulate(b, g);
    });
  }

  Var resize(Var x, Eigen::Index height, Eigen::Index width) {
    const Eigen::Index in_h = value(x).height();
    const Eigen::Index in_w = value(x).width();
    return push(resize_bilinear(value(x), height, width),
                [x, in_h, in_w](Tape& tape, const Tensor<Scalar>& g) {
                  tape.accumulate(x, resize_bilinear_backward(g, in_h, in_w));
                });
  }

  Var softmax(Var x) {
    const std::size_t self = nodes_.size();
    return push(softmax_channels(value(x)), [x, self](Tape& tape, const Tensor<Scalar>& g) {
      tape.accumulate(x, softmax_backward(tape.nodes_[self].value, g));
    });
  }

  const Tensor<Scalar>& value(Var v) const { return nodes_.at(checked(v)).value; }

  /// Reverse pass seeded with dL/d(output) for one or more outputs.
  void backward(const std::vector<Seed>& seeds) {
    if (nodes_.empty()) throw UsageError("backward called before any forward operation");
    if (seeds.empty()) throw UsageError("backward needs at least one seed");
    grads_.assign(nodes_.size(), Tensor<Scalar>());
    for (const auto& [var, g] : seeds) {
      if (!g.same_shape(value(var))) {
        throw ShapeError("backward seed has shape " + g.shape_string() + ", value has " +
                         value(var).shape_string());
      }
      accumulate(var, g);
    }
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].backward && !grads_[i].empty()) nodes_[i].backward(*this, grads_[i]);
    }
    backward_done_ = true;
  }

  void backward(Var output, const Tensor<Scalar>& upstream) {
    backward(std::vector<Seed>{{output, upstream}});
  }

  /// Gradient of the seeded objective w.r.t. v; zero if v did not contribute.
  Tensor<Scalar> grad(Var v) const {
    if (!backward_done_) throw UsageError("grad requested before backward");
    const auto& g = grads_.at(checked(v));
    return g.empty() ? Tensor<Scalar>::zeros_like(value(v)) : g;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  using BackwardFn = std::function<void(Tape&, const Tensor<Scalar>&)>;

  struct Node {
    Tensor<Scalar> value;
    BackwardFn backward;
  };

  Var push(Tensor<Scalar> value, BackwardFn fn) {
    nodes_.push_back({std::move(value), std::move(fn)});
    return Var{nodes_.size() - 1};
  }

  std::size_t checked(Var v) const {
    if (v.index >= nodes_.size()) throw UsageError("variable does not belong to this tape");
    return v.index;
  }

  void accumulate(Var v, const Tensor<Scalar>& g) {
    auto& slot = grads_[v.index];
    if (slot.empty()) {
      slot = g;
    } else {
      slot.data() += g.data();
    }
  }

  std::vector<Node> nodes_;
  std::vector<Tensor<Scalar>> grads_;
  bool backward_done_ = false;
};

}  // namespace jrn
