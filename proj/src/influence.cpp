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

#include "jrn/influence.hpp"

#include <bit>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jrn/errors.hpp"

namespace jrn {

const char* setup_name(Setup s) {
  switch (s) {
    case Setup::Full: return "A";
    case Setup::SemanticMuted: return "B";
    case Setup::DepthMuted: return "C";
  }
  return "?";
}

double semantic_performance(const MetricReport& r) { return 100.0 * r.seg.mean_iou; }

double depth_performance(const MetricReport& r) { return -100.0 * r.depth.rel_sqr; }

std::vector<PredictionPair<float>> predict(const JrnNetwork<float>& net,
                                           const std::vector<Sample>& samples, Setup setup) {
  std::vector<PredictionPair<float>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const Tensorf& depth =
        setup == Setup::DepthMuted ? Tensorf::zeros_like(s.input.depth) : s.input.depth;
    const Tensorf& sem =
        setup == Setup::SemanticMuted ? Tensorf::zeros_like(s.input.semantics) : s.input.semantics;
    out.push_back(jrn_forward(net, depth, sem));
  }
  return out;
}

MetricReport evaluate(const JrnNetwork<float>& net, const std::vector<Sample>& samples) {
  return evaluate_predictions(predict(net, samples), samples);
}

MetricReport evaluate_inputs(const std::vector<Sample>& samples) {
  std::vector<PredictionPair<float>> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(s.input);
  return evaluate_predictions(inputs, samples);
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ull;
    }
  }
  template <typename Array>
  void floats(const Array& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(a[i]));
      bytes(&bits, sizeof bits);
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

}  // namespace

std::uint64_t provenance_of(const JrnNetwork<float>& net, const std::vector<Sample>& samples) {
  Fnv1a h;
  for (const auto* layer : net.layers()) {
    h.floats(layer->weights);
    h.floats(layer->bias);
  }
  for (const auto& s : samples) {
    h.bytes(s.id.data(), s.id.size());
    h.floats(s.input.depth.data());
    h.floats(s.input.semantics.data());
  }
  return h.value();
}

SetupResult run_setup(const JrnNetwork<float>& net, const std::vector<Sample>& samples,
                      Setup setup) {
  if (samples.empty()) throw UsageError("influence test needs a nonempty evaluation set");
  SetupResult r;
  r.setup = setup;
  r.provenance = provenance_of(net, samples);
  r.report = setup == Setup::Full ? evaluate(net, samples)
                                  : evaluate_predictions(predict(net, samples, setup), samples);
  r.perf_semantic = semantic_performance(r.report);
  r.perf_depth = depth_performance(r.report);
  return r;
}

std::array<SetupResult, 3> run_setups(const JrnNetwork<float>& net,
                                      const std::vector<Sample>& samples) {
  return {run_setup(net, samples, Setup::Full), run_setup(net, samples, Setup::SemanticMuted),
          run_setup(net, samples, Setup::DepthMuted)};
}

InfluencePoint influence_numbers(const std::string& variant, const SetupResult& full,
                                 const SetupResult& semantic_muted,
                                 const SetupResult& depth_muted) {
  if (full.setup != Setup::Full || semantic_muted.setup != Setup::SemanticMuted ||
      depth_muted.setup != Setup::DepthMuted) {
    throw UsageError(std::string("influence_numbers expects setups (A, B, C), got (") +
                     setup_name(full.setup) + ", " + setup_name(semantic_muted.setup) + ", " +
                     setup_name(depth_muted.setup) + ")");
  }
  if (full.provenance != semantic_muted.provenance || full.provenance != depth_muted.provenance) {
    throw UsageError("influence_numbers: setups come from different networks or datasets");
  }
  return {variant, full.perf_semantic - depth_muted.perf_semantic,
          full.perf_depth - semantic_muted.perf_depth, full.perf_semantic, full.perf_depth};
}

InfluencePoint influence_numbers(const std::string& variant,
                                 const std::array<SetupResult, 3>& results) {
  return influence_numbers(variant, results[0], results[1], results[2]);
}

std::string influence_csv(const std::vector<InfluencePoint>& points) {
  std::string out = std::string(kInfluenceCsvHeader) + "\n";
  for (const auto& p : points) {
    if (p.variant.find_first_of(",\n\r") != std::string::npos) {
      throw UsageError("variant name '" + p.variant + "' cannot appear in a CSV field");
    }
    out += p.variant + "," + format_real(p.omega_d_to_s) + "," + format_real(p.omega_s_to_d) + "," +
           format_real(p.perf_semantic) + "," + format_real(p.perf_depth) + "\n";
  }
  return out;
}

std::vector<InfluencePoint> parse_influence_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kInfluenceCsvHeader) {
    throw DataError("influence CSV: header must be '" + std::string(kInfluenceCsvHeader) + "'");
  }
  std::vector<InfluencePoint> points;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw DataError("influence CSV line " + std::to_string(line_no) + ": expected 5 fields");
    }
    auto real = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') {
        throw DataError("influence CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    points.push_back(
        {fields[0], real(fields[1]), real(fields[2]), real(fields[3]), real(fields[4])});
  }
  return points;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

ReportFiles emit_report(const std::vector<InfluencePoint>& points,
                        const std::filesystem::path& dir) {
  if (points.empty()) throw UsageError("emit_report needs at least one influence point");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  ReportFiles files{dir / "influence.csv", dir / "plot_semantic.dat", dir / "plot_depth.dat"};
  write_text(files.csv, influence_csv(points));

  std::string sem = "# omega_d_to_s mean_iou variant\n";
  std::string depth = "# omega_s_to_d neg_rel_sqr_x100 variant\n";
  for (const auto& p : points) {
    sem += format_real(p.omega_d_to_s) + " " + format_real(p.perf_semantic) + " " + p.variant + "\n";
    depth += format_real(p.omega_s_to_d) + " " + format_real(p.perf_depth) + " " + p.variant + "\n";
  }
  write_text(files.semantic_plot, sem);
  write_text(files.depth_plot, depth);
  return files;
}

}  // namespace jrn
