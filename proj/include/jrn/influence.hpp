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
#include <filesystem>
#include <string>
#include <vector>

#include "jrn/metrics.hpp"
#include "jrn/model.hpp"
#include "jrn/sample.hpp"

namespace jrn {

/// Inference setups of the cross-modality influence test.
enum class Setup {
  Full,          // A: both inputs
  SemanticMuted, // B: semantic input replaced by zeros
  DepthMuted,    // C: depth input replaced by zeros
};

const char* setup_name(Setup s);

struct SetupResult {
  Setup setup = Setup::Full;
  double perf_semantic = 0.0; // mean IOU in percent
  double perf_depth = 0.0;    // -100 * rel_sqr
  /// Fingerprint of (network parameters, evaluation inputs).
  std::uint64_t provenance = 0;
  MetricReport report;
};

struct InfluencePoint {
  std::string variant;
  double omega_d_to_s = 0.0;
  double omega_s_to_d = 0.0;
  double perf_semantic = 0.0;
  double perf_depth = 0.0;
};

/// Semantic performance: mean IOU in percent.
double semantic_performance(const MetricReport& r);
/// Depth performance: -100 * rel_sqr (higher is better).
double depth_performance(const MetricReport& r);

/// Refined predictions for every sample; `setup` selects which input is
/// replaced by an all-zero tensor.
std::vector<PredictionPair<float>> predict(const JrnNetwork<float>& net,
                                           const std::vector<Sample>& samples,
                                           Setup setup = Setup::Full);

/// Ordinary evaluation of the network on a split (pooled metrics).
MetricReport evaluate(const JrnNetwork<float>& net, const std::vector<Sample>& samples);

/// Metrics of the raw single-modality inputs themselves.
MetricReport evaluate_inputs(const std::vector<Sample>& samples);

std::uint64_t provenance_of(const JrnNetwork<float>& net, const std::vector<Sample>& samples);

SetupResult run_setup(const JrnNetwork<float>& net, const std::vector<Sample>& samples, Setup setup);

/// Runs setups A, B, C in that order.
std::array<SetupResult, 3> run_setups(const JrnNetwork<float>& net,
                                      const std::vector<Sample>& samples);

/// omega_{S->D'} = A_D(full) - A_D(semantic muted)
/// omega_{D->S'} = A_S(full) - A_S(depth muted)
/// Throws UsageError if the setups are out of place or come from different
/// networks or datasets.
InfluencePoint influence_numbers(const std::string& variant, const SetupResult& full,
                                 const SetupResult& semantic_muted, const SetupResult& depth_muted);
InfluencePoint influence_numbers(const std::string& variant,
                                 const std::array<SetupResult, 3>& results);

inline constexpr const char* kInfluenceCsvHeader =
    "variant,omega_d_to_s,omega_s_to_d,mean_iou,neg_rel_sqr_x100";

/// CSV text: header then one row per point, reals as "%.6g", LF endings.
std::string influence_csv(const std::vector<InfluencePoint>& points);
std::vector<InfluencePoint> parse_influence_csv(const std::string& text);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path semantic_plot;
  std::filesystem::path depth_plot;
};

/// Writes influence.csv, plot_semantic.dat (omega_d_to_s vs mean IOU) and
/// plot_depth.dat (omega_s_to_d vs -100 rel_sqr) into `dir`.
ReportFiles emit_report(const std::vector<InfluencePoint>& points, const std::filesystem::path& dir);

}  // namespace jrn
