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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jrn/sample.hpp"

namespace jrn {

/// The five geometric classes used throughout.
enum SceneClass : std::int32_t { Ground = 0, Vertical = 1, Ceiling = 2, Furniture = 3, Object = 4 };

inline constexpr int kNumSceneClasses = 5;
inline constexpr std::array<const char*, kNumSceneClasses> kSceneClassNames = {
    "Ground", "Vertical", "Ceiling", "Furniture", "Object"};

struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 64;
  int width = 64;
  int num_classes = kNumSceneClasses;
  double max_depth = 10.0;

  void validate() const;
};

/// Stand-in for the single-modality predictor networks.
struct NoiseConfig {
  double depth_noise_sigma = 0.3; // meters
  int depth_blur_radius = 2;      // pixels, box blur
  double label_flip_rate = 0.15;  // fraction of pixels relabeled to a wrong class
  double sem_temperature = 0.5;   // softmax(one_hot / temperature)

  void validate(int num_classes) const;
};

/// Box room without occluders: ceiling band, back wall, floor. Ground and
/// ceiling depth run linearly from the camera side to the back wall.
GroundTruth generate_layout(const SceneSpec& spec);

/// Layout plus 1-4 fronto-parallel rectangles labeled Furniture or Object,
/// each strictly nearer than everything it covers. Deterministic in spec.seed.
GroundTruth generate_scene(const SceneSpec& spec);

/// depth = clamp(box_blur(gt) + N(0, sigma^2), 0, 10);
/// semantics = softmax(one_hot(flipped labels) / temperature).
PredictionPair<float> corrupt_predictions(const GroundTruth& gt, const NoiseConfig& noise,
                                          std::uint64_t seed);

Tensorf box_blur(const Tensorf& input, int radius);

/// Scene i uses layout seed derive_seed(seed, 2i) and corruption seed
/// derive_seed(seed, 2i + 1); ids are "scene_0000", "scene_0001", ...
std::vector<Sample> generate_dataset(int count, int size, std::uint64_t seed,
                                     const NoiseConfig& noise);

}  // namespace jrn
