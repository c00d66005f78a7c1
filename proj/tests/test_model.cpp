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

#include <doctest.h>

#include "gradient_suite.hpp"
#include "jrn/model.hpp"

using namespace jrn;
using namespace jrn::testing;

TEST_CASE("variant configurations") {
  const auto sum60 = JrnConfig::variant("sum60");
  CHECK(sum60.fusion == FusionOp::Sum);
  CHECK(sum60.post_fusion_channels == 20);
  CHECK(sum60.branch_output_channels == 60);
  const auto cat1 = JrnConfig::variant("Cat1");
  CHECK(cat1.fusion == FusionOp::Concatenate);
  CHECK(cat1.post_fusion_channels == 40);
  CHECK(cat1.branch_output_channels == 1);
  for (const auto& name : JrnConfig::variant_names()) {
    CHECK(JrnConfig::variant(name).variant_name() == name);
  }
  CHECK_THROWS_AS(JrnConfig::variant("sum10"), ConfigError);

  auto bad = sum60;
  bad.post_fusion_channels = 40;
  CHECK_THROWS_AS(build_jrn(bad), ConfigError);
  bad = JrnConfig::variant("cat60");
  bad.post_fusion_channels = 20;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = JrnConfig::variant("cat5");
  bad.branch_output_channels = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("parameter counts follow the layer formula") {
  for (const auto& name : JrnConfig::variant_names()) {
    const auto cfg = JrnConfig::variant(name);
    const bool sum = cfg.fusion == FusionOp::Sum;
    CHECK(param_count(cfg) == symbolic_param_count(sum, cfg.branch_output_channels, 5));
    CHECK(build_jrn(cfg).parameter_count() == param_count(cfg));
    CHECK(param_count(cfg) > 0);
  }
  CHECK(param_count(JrnConfig::variant("cat60")) - param_count(JrnConfig::variant("sum60")) ==
        3 * 60 * 20 * 9);

  // Doubling k only touches the semantic input convs and the semantic head.
  const auto k5 = JrnConfig::variant("cat10", 0, 5);
  const auto k10 = JrnConfig::variant("cat10", 0, 10);
  const std::int64_t sem_in_delta = 3 * (20 * 5 * 9);
  const std::int64_t head_delta = 5 * 30 + 5;
  CHECK(param_count(k10) - param_count(k5) == sem_in_delta + head_delta);
  const auto a = build_jrn(k5);
  const auto b = build_jrn(k10);
  const auto la = a.layers();
  const auto lb = b.layers();
  const auto names = a.layer_names();
  for (std::size_t i = 0; i < la.size(); ++i) {
    const bool semantic = names[i].ends_with("sem_in") || names[i] == "sem_head";
    CHECK(la[i]->same_shape(*lb[i]) != semantic);
  }
}

TEST_CASE("initialization is reproducible and fan-in scaled") {
  const auto cfg = JrnConfig::variant("sum60", 42);
  const auto a = build_jrn(cfg);
  const auto b = build_jrn(cfg);
  CHECK(a == b);
  CHECK_FALSE(a == build_jrn(JrnConfig::variant("sum60", 43)));
  for (const auto* layer : a.layers()) {
    CHECK((layer->bias == 0.0f).all());
  }
  // Empirical variance of the largest layer against 2 / fan_in.
  const auto& merge = a.merge;
  const double var = merge.weights.cast<double>().square().mean();
  CHECK(var == doctest::Approx(2.0 / (180 * 9)).epsilon(0.02));
}

TEST_CASE("sum60 and cat60 from one seed share every non-fusion layer") {
  const auto sum = build_jrn(JrnConfig::variant("sum60", 5));
  const auto cat = build_jrn(JrnConfig::variant("cat60", 5));
  const auto ls = sum.layers();
  const auto lc = cat.layers();
  const auto names = sum.layer_names();
  for (std::size_t i = 0; i < ls.size(); ++i) {
    CAPTURE(names[i]);
    if (names[i].ends_with(".fuse")) {
      CHECK(ls[i]->in_channels == 20);
      CHECK(lc[i]->in_channels == 40);
    } else {
      CHECK(*ls[i] == *lc[i]);
    }
  }
}

TEST_CASE("scale branch shapes") {
  Rng rng(1);
  const auto net = build_jrn(JrnConfig::variant("sum60", 1));
  const auto d = random_tensor<float>(rng, 1, 16, 16, 0.5, 10);
  const auto s = softmax_channels(random_tensor<float>(rng, 5, 16, 16));
  const auto out = scale_branch_forward(d, s, net.branches[1], net.config);
  CHECK(out.channels() == 60);
  CHECK(out.height() == 16);
  CHECK(out.width() == 16);
  CHECK(scale_branch_forward(d, Tensorf::zeros_like(s), net.branches[1], net.config).all_finite());
  CHECK_THROWS_AS(scale_branch_forward(d, Tensorf(4, 16, 16), net.branches[1], net.config),
                  ShapeError);

  // Concatenation fusion feeds 40 channels to the post-fusion conv.
  const auto cat = build_jrn(JrnConfig::variant("cat60", 1));
  CHECK(cat.branches[0].fuse.in_channels == 40);
  Tape<float> tape;
  const auto fused = tape.concat(tape.relu(tape.conv2d(tape.input(d), cat.branches[0].depth_in)),
                                 tape.relu(tape.conv2d(tape.input(s), cat.branches[0].sem_in)));
  CHECK(tape.value(fused).channels() == 40);
}

TEST_CASE("forward shape closure and output contract for every variant") {
  Rng rng(6);
  for (const auto& name : JrnConfig::variant_names()) {
    CAPTURE(name);
    const auto net = build_jrn(JrnConfig::variant(name, 3));
    for (auto [h, w] : {std::pair{64, 64}, {16, 24}, {8, 8}}) {
      // Inputs scaled up so the unclamped depth head leaves [0, 10].
      const auto d = random_tensor<float>(rng, 1, h, w, 0.0, 40.0);
      const auto s = softmax_channels(random_tensor<float>(rng, 5, h, w, -3, 3));
      const auto out = jrn_forward(net, d, s);
      CHECK(out.depth.channels() == 1);
      CHECK(out.depth.height() == h);
      CHECK(out.depth.width() == w);
      CHECK(out.semantics.channels() == 5);
      CHECK(out.depth.data().minCoeff() >= 0.0f);
      CHECK(out.depth.data().maxCoeff() <= 10.0f);
      for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
          double sum = 0.0;
          for (Eigen::Index c = 0; c < 5; ++c) sum += out.semantics(c, y, x);
          CHECK(std::abs(sum - 1.0) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("forward rejects bad input shapes") {
  const auto net = build_jrn(JrnConfig::variant("cat5"));
  CHECK_THROWS_AS(jrn_forward(net, Tensorf(1, 12, 16), Tensorf(5, 12, 16)), ShapeError);
  CHECK_THROWS_AS(jrn_forward(net, Tensorf(1, 16, 16), Tensorf(4, 16, 16)), ShapeError);
  CHECK_THROWS_AS(jrn_forward(net, Tensorf(2, 16, 16), Tensorf(5, 16, 16)), ShapeError);
  CHECK_THROWS_AS(jrn_forward(net, Tensorf(1, 16, 16), Tensorf(5, 16, 8)), ShapeError);
}

TEST_CASE("full network gradient matches finite differences") {
  for (const auto& name : JrnConfig::variant_names()) {
    CAPTURE(name);
    CHECK(gradcheck_jrn(1, name) < kFdTolerance);
  }
}
