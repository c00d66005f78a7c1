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

#include "jrn/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace jrn {

namespace {

struct VariantSpec {
  const char* name;
  FusionOp fusion;
  int c0;
  int c;
};

constexpr std::array<VariantSpec, 5> kVariants{{
    {"cat60", FusionOp::Concatenate, 40, 60},
    {"sum60", FusionOp::Sum, 20, 60},
    {"cat10", FusionOp::Concatenate, 40, 10},
    {"cat5", FusionOp::Concatenate, 40, 5},
    {"cat1", FusionOp::Concatenate, 40, 1},
}};

const VariantSpec* find_variant(const JrnConfig& c) {
  for (const auto& v : kVariants) {
    if (v.fusion == c.fusion && v.c0 == c.post_fusion_channels && v.c == c.branch_output_channels) {
      return &v;
    }
  }
  return nullptr;
}

}  // namespace

void JrnConfig::validate() const {
  if (branch_feature_channels != 20) {
    throw ConfigError("branch feature width must be 20, got " +
                      std::to_string(branch_feature_channels));
  }
  if (scale_divisors != std::vector<int>{8, 4, 2}) {
    throw ConfigError("scales must be 1/8, 1/4, 1/2");
  }
  if (num_classes < 2) throw ConfigError("need at least 2 semantic classes");
  const int expected_c0 =
      fusion == FusionOp::Sum ? branch_feature_channels : 2 * branch_feature_channels;
  if (post_fusion_channels != expected_c0) {
    throw ConfigError(std::string(fusion == FusionOp::Sum ? "sum" : "concatenate") +
                      " fusion yields " + std::to_string(expected_c0) + " channels, config says " +
                      std::to_string(post_fusion_channels));
  }
  if (find_variant(*this) == nullptr) {
    throw ConfigError("no variant has fusion " +
                      std::string(fusion == FusionOp::Sum ? "sum" : "concatenate") + " with C=" +
                      std::to_string(branch_output_channels));
  }
}

std::string JrnConfig::variant_name() const {
  validate();
  return find_variant(*this)->name;
}

const std::vector<std::string>& JrnConfig::variant_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& v : kVariants) out.emplace_back(v.name);
    return out;
  }();
  return names;
}

JrnConfig JrnConfig::variant(std::string_view name, std::uint64_t seed, int num_classes) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (const auto& v : kVariants) {
    if (lower == v.name) {
      JrnConfig c;
      c.fusion = v.fusion;
      c.post_fusion_channels = v.c0;
      c.branch_output_channels = v.c;
      c.num_classes = num_classes;
      c.rng_seed = seed;
      c.validate();
      return c;
    }
  }
  std::string valid;
  for (const auto& v : kVariants) valid += (valid.empty() ? "" : ", ") + std::string(v.name);
  throw ConfigError("unknown variant '" + std::string(name) + "'; valid names: " + valid);
}

std::int64_t param_count(const JrnConfig& config) {
  config.validate();
  const std::int64_t f = config.branch_feature_channels;
  const std::int64_t c0 = config.post_fusion_channels;
  const std::int64_t c = config.branch_output_channels;
  const std::int64_t k = config.num_classes;
  const auto scales = static_cast<std::int64_t>(config.scale_divisors.size());
  auto conv = [](std::int64_t out, std::int64_t in, std::int64_t taps) {
    return out * in * taps + out;
  };
  const std::int64_t branch = conv(f, 1, 9) + conv(f, k, 9) + conv(c, c0, 9) + conv(c, c, 9);
  const std::int64_t merged = scales * c;
  return scales * branch + conv(merged, merged, 9) + conv(1, merged, 1) + conv(k, merged, 1);
}

}  // namespace jrn
