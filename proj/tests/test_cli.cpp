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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "jrn/io.hpp"
#include "jrn/model.hpp"
#include "scratch_dir.hpp"

using namespace jrn;
using namespace jrn::testing;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(JRN_CLI_PATH) + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string field; std::getline(ss, field, ',');) out.push_back(field);
  return out;
}

/// Concatenated bytes of every regular file under dir, in path order.
std::string tree_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + slurp(f);
  return all;
}

/// Shared small dataset for the slower commands.
class CliFixture {
 public:
  CliFixture() : dir_("cli") {
    REQUIRE(run_cli("gen-data --count 3 --size 16 --seed 7 --out \"" + data().string() + "\"", log()) == 0);
  }
  fs::path root() const { return dir_.path(); }
  fs::path data() const { return dir_.path() / "data"; }
  fs::path manifest() const { return data() / "manifest.json"; }
  fs::path log() const { return dir_.path() / "log.txt"; }

 private:
  ScratchDir dir_;
};

}  // namespace

TEST_CASE_FIXTURE(CliFixture, "gen-data writes one directory per scene and a manifest") {
  int dirs = 0;
  for (const auto& e : fs::directory_iterator(data())) dirs += e.is_directory();
  CHECK(dirs == 3);
  CHECK(fs::exists(manifest()));
  CHECK(load_dataset(manifest()).size() == 3);
}

TEST_CASE_FIXTURE(CliFixture, "gen-data is deterministic") {
  const auto again = root() / "again";
  REQUIRE(run_cli("gen-data --count 3 --size 16 --seed 7 --out \"" + again.string() + "\"", log()) == 0);
  CHECK(tree_bytes(data()) == tree_bytes(again));
  const auto other = root() / "other";
  REQUIRE(run_cli("gen-data --count 3 --size 16 --seed 8 --out \"" + other.string() + "\"", log()) == 0);
  CHECK(tree_bytes(data()) != tree_bytes(other));
}

TEST_CASE("usage errors exit with code 2") {
  ScratchDir dir("cli_usage");
  const auto log = dir.path() / "log.txt";
  CHECK(run_cli("gen-data --count 2 --size 12 --out \"" + (dir.path() / "d").string() + "\"", log) == 2);
  CHECK(slurp(log).find("divisible by 8") != std::string::npos);
  CHECK(run_cli("", log) == 2);
  CHECK(run_cli("frobnicate", log) == 2);
  CHECK(run_cli("train --data x --out y", log) == 2);
  CHECK(run_cli("--help", log) == 0);
}

TEST_CASE_FIXTURE(CliFixture, "unknown variant lists the valid names") {
  CHECK(run_cli("train --variant cat7 --data \"" + manifest().string() + "\" --out \"" +
                    (root() / "run").string() + "\"",
                log()) == 2);
  const auto text = slurp(log());
  for (const auto& name : JrnConfig::variant_names()) {
    CHECK(text.find(name) != std::string::npos);
  }
}

TEST_CASE("runtime errors exit with code 1") {
  ScratchDir dir("cli_runtime");
  const auto log = dir.path() / "log.txt";
  CHECK(run_cli("train --variant cat1 --data \"" + (dir.path() / "none.json").string() + "\" --out \"" +
                    dir.path().string() + "\"",
                log) == 1);
  CHECK(run_cli("eval --checkpoint \"" + (dir.path() / "none.jrnw").string() + "\" --data x", log) == 1);
}

TEST_CASE_FIXTURE(CliFixture, "train writes a checkpoint and one loss row per iteration") {
  const auto before = tree_bytes(data());
  const auto run = root() / "run";
  REQUIRE(run_cli("train --variant cat5 --epochs 2 --seed 1 --data \"" + manifest().string() +
                      "\" --out \"" + run.string() + "\"",
                  log()) == 0);
  CHECK(tree_bytes(data()) == before);
  const auto rows = lines(slurp(run / "cat5_loss.csv"));
  REQUIRE(rows.size() == 1 + 2 * 3);
  CHECK(rows[0] == "iteration,epoch,sample_id,depth_loss,semantic_loss,joint_loss,gradient_norm");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    REQUIRE(f.size() == 7);
    CHECK(std::stoi(f[0]) == static_cast<int>(i - 1));
    CHECK(std::isfinite(std::stod(f[5])));
  }
  const auto net = read_checkpoint(run / "cat5.jrnw");
  CHECK(net.config.variant_name() == "cat5");
  CHECK_FALSE(net == build_jrn(JrnConfig::variant("cat5", 1)));
}

TEST_CASE_FIXTURE(CliFixture, "train is deterministic and a zero learning rate keeps the init") {
  const auto a = root() / "a";
  const auto b = root() / "b";
  const auto z = root() / "z";
  const std::string common = "train --variant cat1 --epochs 2 --seed 4 --data \"" + manifest().string() + "\"";
  REQUIRE(run_cli(common + " --out \"" + a.string() + "\"", log()) == 0);
  REQUIRE(run_cli(common + " --out \"" + b.string() + "\"", log()) == 0);
  CHECK(slurp(a / "cat1.jrnw") == slurp(b / "cat1.jrnw"));
  CHECK(slurp(a / "cat1_loss.csv") == slurp(b / "cat1_loss.csv"));

  REQUIRE(run_cli(common + " --lr 0 --out \"" + z.string() + "\"", log()) == 0);
  CHECK(read_checkpoint(z / "cat1.jrnw") == build_jrn(JrnConfig::variant("cat1", 4)));
}

TEST_CASE_FIXTURE(CliFixture, "eval reports the input row and the variant row") {
  const auto ckpt = root() / "cat10.jrnw";
  write_checkpoint(build_jrn(JrnConfig::variant("cat10", 2)), ckpt);
  const auto out = root() / "metrics.csv";
  REQUIRE(run_cli("eval --checkpoint \"" + ckpt.string() + "\" --data \"" + manifest().string() +
                      "\" --out \"" + out.string() + "\"",
                  log()) == 0);
  const auto rows = lines(slurp(out));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("variant,rel,rel_sqr,log10,rms_linear,rms_log,delta1,delta2,delta3,mean_iou", 0) == 0);
  CHECK(rows[1].rfind("input,", 0) == 0);
  CHECK(rows[2].rfind("cat10,", 0) == 0);
  for (int r = 1; r <= 2; ++r) {
    const auto f = split(rows[r]);
    for (std::size_t i = 1; i < 11; ++i) CHECK(std::isfinite(std::stod(f[i])));
    CHECK(std::stod(f[6]) <= std::stod(f[7]));
    CHECK(std::stod(f[7]) <= std::stod(f[8]));
  }

  CHECK(run_cli("eval --checkpoint \"" + ckpt.string() + "\" --data \"" + manifest().string() + "\"",
                log()) == 0);
  CHECK(slurp(log()).find("input,") != std::string::npos);
}

TEST_CASE_FIXTURE(CliFixture, "eval rejects a class-count mismatch") {
  const auto ckpt = root() / "k3.jrnw";
  write_checkpoint(build_jrn(JrnConfig::variant("cat1", 2, 3)), ckpt);
  CHECK(run_cli("eval --checkpoint \"" + ckpt.string() + "\" --data \"" + manifest().string() + "\"",
                log()) == 2);
  CHECK(slurp(log()).find("classes") != std::string::npos);
}

TEST_CASE_FIXTURE(CliFixture, "influence emits one row per checkpoint, reproducibly") {
  std::string flags;
  for (const auto& name : {"cat60", "cat1"}) {
    const auto ckpt = root() / (std::string(name) + ".jrnw");
    write_checkpoint(build_jrn(JrnConfig::variant(name, 3)), ckpt);
    flags += " --checkpoint \"" + ckpt.string() + "\"";
  }
  const auto out1 = root() / "inf1";
  const auto out2 = root() / "inf2";
  const std::string data_flag = " --data \"" + manifest().string() + "\"";
  REQUIRE(run_cli("influence" + flags + data_flag + " --out \"" + out1.string() + "\"", log()) == 0);
  REQUIRE(run_cli("influence" + flags + data_flag + " --out \"" + out2.string() + "\"", log()) == 0);
  const auto csv = slurp(out1 / "influence.csv");
  CHECK(csv == slurp(out2 / "influence.csv"));
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rfind("cat60,", 0) == 0);
  CHECK(rows[2].rfind("cat1,", 0) == 0);
  for (int r = 1; r <= 2; ++r) {
    const auto f = split(rows[r]);
    CHECK(std::isfinite(std::stod(f[1])));
    CHECK(std::isfinite(std::stod(f[2])));
  }
  CHECK(fs::exists(out1 / "plot_semantic.dat"));
  CHECK(fs::exists(out1 / "plot_depth.dat"));
}
