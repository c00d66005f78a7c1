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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "jrn/datagen.hpp"
#include "jrn/errors.hpp"
#include "jrn/influence.hpp"
#include "jrn/io.hpp"
#include "jrn/metrics.hpp"
#include "jrn/model.hpp"
#include "jrn/parallel.hpp"
#include "jrn/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GenDataArgs {
  int count = 32;
  int size = 64;
  std::uint64_t seed = 0;
  jrn::NoiseConfig noise;
  fs::path out;
};

struct TrainArgs {
  std::string variant;
  fs::path data;
  int epochs = 1;
  std::uint64_t seed = 0;
  float lr = 0.001f;
  float lr_scale = 5.0f;
  float momentum = 0.9f;
  double clip = 0.0;
  fs::path out;
};

struct EvalArgs {
  fs::path checkpoint;
  fs::path data;
  fs::path out;
};

struct InfluenceArgs {
  std::vector<fs::path> checkpoints;
  fs::path data;
  fs::path out;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw jrn::IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw jrn::IoError("write to '" + path.string() + "' failed");
}

std::string fixed9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int run_gen_data(const GenDataArgs& a) {
  const auto samples = jrn::generate_dataset(a.count, a.size, a.seed, a.noise);
  jrn::write_dataset(samples, a.out);
  const auto inputs = jrn::evaluate_inputs(samples);
  std::cerr << "gen-data: wrote " << samples.size() << " scenes of " << a.size << "x" << a.size
            << " to " << a.out.string() << " (input rel " << jrn::format_real(inputs.depth.rel)
            << ", mean IOU " << jrn::format_real(inputs.seg.mean_iou) << ")\n";
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  auto config = jrn::JrnConfig::variant(a.variant, a.seed);
  const auto dataset = jrn::load_dataset(a.data, config.num_classes);
  auto net = jrn::build_jrn(config);

  jrn::TrainOptions options;
  options.epochs = a.epochs;
  options.base_learning_rate = a.lr;
  options.learning_rate_scale = a.lr_scale;
  options.momentum = a.momentum;
  options.max_gradient_norm = a.clip;
  options.shuffle_seed = a.seed;

  std::cerr << "train: " << a.variant << ", " << net.parameter_count() << " parameters, "
            << dataset.size() << " samples, " << a.epochs << " epochs, lr "
            << options.effective_learning_rate() << "\n";
  double epoch_sum = 0.0;
  std::size_t epoch_count = 0;
  const auto trace = jrn::train(net, dataset, options, [&](const jrn::LossRecord& r) {
    epoch_sum += r.loss.total();
    if (++epoch_count == dataset.size()) {
      std::cerr << "train: epoch " << r.epoch << " mean joint loss "
                << jrn::format_real(epoch_sum / static_cast<double>(epoch_count)) << "\n";
      epoch_sum = 0.0;
      epoch_count = 0;
    }
  });

  fs::create_directories(a.out);
  const auto ckpt = a.out / (a.variant + ".jrnw");
  jrn::write_checkpoint(net, ckpt);
  std::string csv = "iteration,epoch,sample_id,depth_loss,semantic_loss,joint_loss,gradient_norm\n";
  for (const auto& r : trace) {
    csv += std::to_string(r.iteration) + "," + std::to_string(r.epoch) + "," + r.sample_id + "," +
           fixed9(r.loss.depth) + "," + fixed9(r.loss.semantic) + "," + fixed9(r.loss.total()) + "," +
           fixed9(r.gradient_norm) + "\n";
  }
  write_text(a.out / (a.variant + "_loss.csv"), csv);
  std::cerr << "train: wrote " << ckpt.string() << "\n";
  return kExitOk;
}

void check_classes(const jrn::JrnNetwork<float>& net, const fs::path& manifest) {
  const int found = jrn::dataset_num_classes(manifest);
  if (found != net.config.num_classes) {
    throw jrn::ConfigError("checkpoint has " + std::to_string(net.config.num_classes) +
                           " classes but the dataset has " + std::to_string(found));
  }
}

int run_eval(const EvalArgs& a) {
  const auto net = jrn::read_checkpoint(a.checkpoint);
  check_classes(net, a.data);
  const auto dataset = jrn::load_dataset(a.data, net.config.num_classes);
  const auto k = net.config.num_classes;
  std::string csv = jrn::metric_csv_header(k) + "\n";
  csv += jrn::metric_csv_row("input", jrn::evaluate_inputs(dataset)) + "\n";
  csv += jrn::metric_csv_row(net.config.variant_name(), jrn::evaluate(net, dataset)) + "\n";
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
    std::cerr << "eval: wrote " << a.out.string() << "\n";
  }
  return kExitOk;
}

int run_influence(const InfluenceArgs& a) {
  std::vector<jrn::InfluencePoint> points;
  std::vector<jrn::Sample> dataset;
  int dataset_classes = -1;
  for (const auto& path : a.checkpoints) {
    const auto net = jrn::read_checkpoint(path);
    check_classes(net, a.data);
    if (net.config.num_classes != dataset_classes) {
      dataset = jrn::load_dataset(a.data, net.config.num_classes);
      dataset_classes = net.config.num_classes;
    }
    const auto name = net.config.variant_name();
    points.push_back(jrn::influence_numbers(name, jrn::run_setups(net, dataset)));
    const auto& p = points.back();
    std::cerr << "influence: " << name << " omega_d_to_s " << jrn::format_real(p.omega_d_to_s)
              << " omega_s_to_d " << jrn::format_real(p.omega_s_to_d) << "\n";
  }
  const auto files = jrn::emit_report(points, a.out);
  std::cerr << "influence: wrote " << files.csv.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint refinement network for depth and semantic labels"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for convolutions")->check(CLI::PositiveNumber);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen_cmd->add_option("--count", gen.count, "Number of scenes")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--size", gen.size, "Scene height and width (multiple of 8)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--depth-sigma", gen.noise.depth_noise_sigma, "Depth noise (m)");
  gen_cmd->add_option("--blur", gen.noise.depth_blur_radius, "Depth box-blur radius (px)");
  gen_cmd->add_option("--flip", gen.noise.label_flip_rate, "Label flip rate");
  gen_cmd->add_option("--temperature", gen.noise.sem_temperature, "Semantic softmax temperature");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one network variant");
  train_cmd->add_option("--variant", tr.variant, "cat60, sum60, cat10, cat5 or cat1")->required();
  train_cmd->add_option("--data", tr.data, "Dataset manifest")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tr.seed, "Seed for initialization and sample order");
  train_cmd->add_option("--lr", tr.lr, "Base learning rate");
  train_cmd->add_option("--lr-scale", tr.lr_scale, "Global learning-rate factor");
  train_cmd->add_option("--momentum", tr.momentum, "Momentum");
  train_cmd->add_option("--clip", tr.clip, "Gradient-norm ceiling, 0 disables");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against its inputs");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset manifest")->required();
  eval_cmd->add_option("--out", ev.out, "Metric CSV (stdout if omitted)");

  InfluenceArgs inf;
  auto* inf_cmd = app.add_subcommand("influence", "Cross-modality influence of one or more checkpoints");
  inf_cmd->add_option("--checkpoint", inf.checkpoints, "Checkpoint file (repeatable)")->required();
  inf_cmd->add_option("--data", inf.data, "Dataset manifest")->required();
  inf_cmd->add_option("--out", inf.out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    jrn::set_worker_threads(threads);
    if (*gen_cmd) return run_gen_data(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*inf_cmd) return run_influence(inf);
  } catch (const jrn::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const jrn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
