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

#include <cmath>

#include "jrn/datagen.hpp"
#include "jrn/errors.hpp"
#include "jrn/metrics.hpp"

using namespace jrn;

namespace {

bool bitwise_equal(const GroundTruth& a, const GroundTruth& b) {
  return a.depth == b.depth && (a.labels.array() == b.labels.array()).all() &&
         (a.mask.valid.array() == b.mask.valid.array()).all();
}

}  // namespace

TEST_CASE("scene generation is deterministic in the seed") {
  SceneSpec spec;
  spec.seed = 1234;
  CHECK(bitwise_equal(generate_scene(spec), generate_scene(spec)));
  SceneSpec other = spec;
  other.seed = 1235;
  CHECK_FALSE(bitwise_equal(generate_scene(spec), generate_scene(other)));
}

TEST_CASE("scene labels and depths are in range") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.height = 32;
    spec.width = 48;
    const auto gt = generate_scene(spec);
    CHECK(gt.labels.minCoeff() >= 0);
    CHECK(gt.labels.maxCoeff() < kNumSceneClasses);
    CHECK(gt.depth.data().minCoeff() > 0.0f);
    CHECK(gt.depth.data().maxCoeff() <= 10.0f);
    CHECK(gt.mask.count() == 32 * 48);
  }
}

TEST_CASE("scenes contain the layout classes and at least one occluder") {
  SceneSpec spec;
  spec.seed = 5;
  const auto gt = generate_scene(spec);
  const auto has = [&](int c) { return (gt.labels.array() == c).any(); };
  CHECK(has(Ground));
  CHECK(has(Ceiling));
  CHECK((has(Furniture) || has(Object)));
}

TEST_CASE("occluders are nearer than the background they hide") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    const auto scene = generate_scene(spec);
    const auto layout = generate_layout(spec);
    for (Eigen::Index y = 0; y < scene.height(); ++y) {
      for (Eigen::Index x = 0; x < scene.width(); ++x) {
        const auto label = scene.labels(y, x);
        if (label == Furniture || label == Object) {
          REQUIRE(scene.depth(0, y, x) < layout.depth(0, y, x));
        } else {
          REQUIRE(scene.depth(0, y, x) == layout.depth(0, y, x));
        }
      }
    }
  }
}

TEST_CASE("floor depth decreases toward the viewer") {
  SceneSpec spec;
  spec.seed = 9;
  const auto layout = generate_layout(spec);
  const auto last = layout.height() - 1;
  CHECK(layout.labels(last, 0) == Ground);
  CHECK(layout.depth(0, last, 0) < layout.depth(0, last - 1, 0));
}

TEST_CASE("sizes not divisible by eight are rejected") {
  SceneSpec spec;
  spec.height = 60;
  CHECK_THROWS_AS(generate_scene(spec), ConfigError);
  CHECK_THROWS_AS(generate_dataset(2, 12, 0, NoiseConfig{}), ConfigError);
}

TEST_CASE("near-identity corruption") {
  SceneSpec spec;
  spec.seed = 3;
  const auto gt = generate_scene(spec);
  NoiseConfig noise{0.0, 0, 0.0, 1e-3};
  const auto pred = corrupt_predictions(gt, noise, 17);
  CHECK(depth_metrics(pred.depth, gt).rel < 1e-3);
  CHECK(seg_metrics(pred.semantics, gt).mean_iou > 0.999);
}

TEST_CASE("flip rate matches the binomial expectation") {
  SceneSpec spec;
  spec.seed = 21;
  const auto gt = generate_scene(spec);
  NoiseConfig noise{0.3, 2, 0.2, 0.5};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pred = corrupt_predictions(gt, noise, seed);
    const double acc = seg_metrics(pred.semantics, gt).pixel_accuracy;
    CHECK(acc == doctest::Approx(0.8).epsilon(0.025));
    CHECK(std::abs(acc - 0.8) <= 0.02);
  }
}

TEST_CASE("flipped pixels always carry a wrong class") {
  SceneSpec spec;
  spec.seed = 8;
  const auto gt = generate_scene(spec);
  NoiseConfig noise{0.0, 0, 0.999, 0.5};
  const auto pred = corrupt_predictions(gt, noise, 4);
  CHECK(seg_metrics(pred.semantics, gt).pixel_accuracy < 0.01);
}

TEST_CASE("corrupted predictions respect the input contract") {
  const NoiseConfig configs[] = {{0.3, 2, 0.15, 0.5}, {2.0, 0, 0.9, 10.0}, {5.0, 5, 0.0, 0.01}};
  for (const auto& noise : configs) {
    SceneSpec spec;
    spec.seed = 42;
    const auto gt = generate_scene(spec);
    const auto pred = corrupt_predictions(gt, noise, 99);
    CHECK(pred.depth.data().minCoeff() >= 0.0f);
    CHECK(pred.depth.data().maxCoeff() <= 10.0f);
    CHECK(pred.semantics.all_finite());
    CHECK(pred.semantics.data().minCoeff() >= 0.0f);
    for (Eigen::Index y = 0; y < gt.height(); ++y) {
      for (Eigen::Index x = 0; x < gt.width(); ++x) {
        double sum = 0.0;
        for (int c = 0; c < kNumSceneClasses; ++c) sum += pred.semantics(c, y, x);
        REQUIRE(std::abs(sum - 1.0) < 1e-5);
      }
    }
    CHECK(pred.depth == corrupt_predictions(gt, noise, 99).depth);
    CHECK(pred.semantics == corrupt_predictions(gt, noise, 99).semantics);
  }
}

TEST_CASE("invalid noise configurations are rejected") {
  SceneSpec spec;
  const auto gt = generate_scene(spec);
  CHECK_THROWS_AS(corrupt_predictions(gt, {-1.0, 0, 0.1, 0.5}, 0), ConfigError);
  CHECK_THROWS_AS(corrupt_predictions(gt, {0.1, -1, 0.1, 0.5}, 0), ConfigError);
  CHECK_THROWS_AS(corrupt_predictions(gt, {0.1, 0, 1.0, 0.5}, 0), ConfigError);
  CHECK_THROWS_AS(corrupt_predictions(gt, {0.1, 0, 0.1, 0.0}, 0), ConfigError);
}

TEST_CASE("box blur preserves constants and averages windows") {
  Tensorf flat(1, 5, 5, 2.5f);
  CHECK(box_blur(flat, 2) == flat);
  Tensorf spike(1, 3, 3);
  spike(0, 1, 1) = 9.0f;
  const auto b = box_blur(spike, 1);
  CHECK(b(0, 1, 1) == doctest::Approx(1.0));
  CHECK(b(0, 0, 0) == doctest::Approx(9.0 / 4.0));
  CHECK(b(0, 0, 1) == doctest::Approx(9.0 / 6.0));
}

TEST_CASE("datasets are reproducible and named in order") {
  const auto a = generate_dataset(3, 16, 7, NoiseConfig{});
  const auto b = generate_dataset(3, 16, 7, NoiseConfig{});
  REQUIRE(a.size() == 3);
  CHECK(a[0].id == "scene_0000");
  CHECK(a[2].id == "scene_0002");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(bitwise_equal(a[i].truth, b[i].truth));
    CHECK(a[i].input.depth == b[i].input.depth);
    CHECK(a[i].input.semantics == b[i].input.semantics);
  }
  CHECK_FALSE(a[0].truth.depth == a[1].truth.depth);
}
