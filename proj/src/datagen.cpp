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

#include "jrn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jrn/errors.hpp"
#include "jrn/ops.hpp"
#include "jrn/random.hpp"

namespace jrn {

void SceneSpec::validate() const {
  if (height <= 0 || width <= 0 || height % 8 != 0 || width % 8 != 0) {
    throw ConfigError("scene size " + std::to_string(height) + "x" + std::to_string(width) +
                      " must be positive and divisible by 8");
  }
  if (num_classes != kNumSceneClasses) {
    throw ConfigError("scenes use exactly " + std::to_string(kNumSceneClasses) + " classes");
  }
  if (!(max_depth > 0.0)) throw ConfigError("max depth must be positive");
}

void NoiseConfig::validate(int num_classes) const {
  if (!(depth_noise_sigma >= 0.0)) throw ConfigError("depth noise sigma must be >= 0");
  if (depth_blur_radius < 0) throw ConfigError("blur radius must be >= 0");
  if (!(label_flip_rate >= 0.0 && label_flip_rate < 1.0)) {
    throw ConfigError("label flip rate must lie in [0, 1)");
  }
  if (label_flip_rate > 0.0 && num_classes < 2) {
    throw ConfigError("label flipping needs at least two classes");
  }
  if (!(sem_temperature > 0.0)) throw ConfigError("semantic temperature must be > 0");
}

namespace {

constexpr std::uint64_t kLayoutStream = 0;
constexpr std::uint64_t kOccluderStream = 1;

float lerp(double a, double b, double t) { return static_cast<float>(a + (b - a) * t); }

}  // namespace

GroundTruth generate_layout(const SceneSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, kLayoutStream));
  const int h = spec.height;
  const int w = spec.width;
  const double cap = spec.max_depth;
  const double back = rng.uniform(0.4, 0.85) * cap;
  const double slant = rng.uniform(-0.1, 0.1) * cap;
  const double floor_front = rng.uniform(0.1, 0.2) * cap;
  const double ceiling_front = rng.uniform(0.15, 0.25) * cap;
  const int ceiling_rows = static_cast<int>(std::lround(h * rng.uniform(0.12, 0.25)));
  const int floor_start = static_cast<int>(std::lround(h * rng.uniform(0.6, 0.75)));

  GroundTruth gt{Tensorf(1, h, w), LabelMap(h, w), ValidMask::all(h, w)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double wall = back + slant * ((x + 0.5) / w - 0.5);
      std::int32_t label;
      float depth;
      if (y < ceiling_rows) {
        label = Ceiling;
        depth = lerp(ceiling_front, wall, (y + 0.5) / ceiling_rows);
      } else if (y >= floor_start) {
        label = Ground;
        depth = lerp(wall, floor_front, (y - floor_start + 0.5) / (h - floor_start));
      } else {
        label = Vertical;
        depth = static_cast<float>(wall);
      }
      gt.labels(y, x) = label;
      gt.depth(0, y, x) = std::clamp(depth, 1e-2f, static_cast<float>(cap));
    }
  }
  return gt;
}

GroundTruth generate_scene(const SceneSpec& spec) {
  GroundTruth gt = generate_layout(spec);
  Rng rng(derive_seed(spec.seed, kOccluderStream));
  const int h = spec.height;
  const int w = spec.width;
  const int count = 1 + static_cast<int>(rng.below(4));
  for (int i = 0; i < count; ++i) {
    const int rh = std::max(1, static_cast<int>(std::lround(rng.uniform(0.125, 0.5) * h)));
    const int rw = std::max(1, static_cast<int>(std::lround(rng.uniform(0.125, 0.5) * w)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - rh + 1)));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - rw + 1)));
    const auto label = rng.below(2) == 0 ? Furniture : Object;
    const float nearest_behind = gt.depth.plane(0).block(y0, x0, rh, rw).minCoeff();
    // Strictly in front of everything the rectangle covers.
    const auto depth = static_cast<float>(nearest_behind * rng.uniform(0.5, 0.9));
    gt.depth.plane(0).block(y0, x0, rh, rw).setConstant(depth);
    gt.labels.block(y0, x0, rh, rw).setConstant(label);
  }
  return gt;
}

Tensorf box_blur(const Tensorf& input, int radius) {
  if (radius <= 0) return input;
  Tensorf out = Tensorf::zeros_like(input);
  const auto h = input.height();
  const auto w = input.width();
  for (Eigen::Index c = 0; c < input.channels(); ++c) {
    const auto src = input.plane(c);
    auto dst = out.plane(c);
    for (Eigen::Index y = 0; y < h; ++y) {
      const auto ya = std::max<Eigen::Index>(0, y - radius);
      const auto yb = std::min<Eigen::Index>(h - 1, y + radius);
      for (Eigen::Index x = 0; x < w; ++x) {
        const auto xa = std::max<Eigen::Index>(0, x - radius);
        const auto xb = std::min<Eigen::Index>(w - 1, x + radius);
        const auto window = src.block(ya, xa, yb - ya + 1, xb - xa + 1);
        dst(y, x) = static_cast<float>(window.cast<double>().sum() / static_cast<double>(window.size()));
      }
    }
  }
  return out;
}

PredictionPair<float> corrupt_predictions(const GroundTruth& gt, const NoiseConfig& noise,
                                          std::uint64_t seed) {
  const int k = kNumSceneClasses;
  noise.validate(k);
  Rng rng(seed);
  const auto h = gt.height();
  const auto w = gt.width();

  Tensorf depth = box_blur(gt.depth, noise.depth_blur_radius);
  for (Eigen::Index i = 0; i < depth.size(); ++i) {
    const double v = depth.data()[i] + noise.depth_noise_sigma * rng.normal();
    depth.data()[i] = static_cast<float>(std::clamp(v, 0.0, 10.0));
  }

  Tensorf logits(k, h, w);
  const auto hot = static_cast<float>(1.0 / noise.sem_temperature);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      auto label = gt.labels(y, x);
      if (rng.uniform() < noise.label_flip_rate) {
        label = static_cast<std::int32_t>((label + 1 + static_cast<std::int32_t>(rng.below(k - 1))) % k);
      }
      logits(label, y, x) = hot;
    }
  }
  return {std::move(depth), softmax_channels(logits)};
}

std::vector<Sample> generate_dataset(int count, int size, std::uint64_t seed,
                                     const NoiseConfig& noise) {
  if (count < 1) throw ConfigError("dataset needs at least one scene");
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    SceneSpec spec;
    spec.seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(i));
    spec.height = size;
    spec.width = size;
    auto gt = generate_scene(spec);
    auto input = corrupt_predictions(gt, noise, derive_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1));
    char id[32];
    std::snprintf(id, sizeof id, "scene_%04d", i);
    out.push_back({id, std::move(input), std::move(gt)});
  }
  return out;
}

}  // namespace jrn
