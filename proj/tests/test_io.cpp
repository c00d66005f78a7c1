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

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "jrn/datagen.hpp"
#include "jrn/errors.hpp"
#include "jrn/io.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

using namespace jrn;
using namespace jrn::testing;

namespace {

bool bit_identical(const Tensorf& a, const Tensorf& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data().data(), b.data().data(), sizeof(float) * a.size()) == 0;
}

void rewrite_manifest(const std::filesystem::path& manifest, const nlohmann::json& doc) {
  std::ofstream(manifest) << doc.dump(2);
}

nlohmann::json read_manifest(const std::filesystem::path& manifest) {
  std::ifstream f(manifest);
  return nlohmann::json::parse(f);
}

}  // namespace

TEST_CASE("tensor round trip is bitwise, including special values") {
  ScratchDir dir("io_roundtrip");
  Rng rng(3);
  auto t = random_tensor<float>(rng, 3, 5, 7, -1e6, 1e6);
  t.data()[0] = -0.0f;
  t.data()[1] = std::numeric_limits<float>::denorm_min();
  t.data()[2] = std::numeric_limits<float>::max();
  t.data()[3] = -std::numeric_limits<float>::lowest();
  const auto path = dir.path() / "t.jrnt";
  write_tensor(t, path);
  const auto back = read_tensor(path);
  CHECK(bit_identical(t, back));
  CHECK(std::signbit(back.data()[0]));
}

TEST_CASE("tensor file size follows the container layout") {
  ScratchDir dir("io_size");
  const Tensorf t(2, 3, 4, 1.5f);
  const auto path = dir.path() / "t.jrnt";
  write_tensor(t, path);
  const std::uintmax_t expected = 4 + 4 + 4 + 3 * 4 + 2 * 3 * 4 * 4;
  CHECK(std::filesystem::file_size(path) == expected);
  CHECK(expected == kTensorHeaderBytes + kTensorDimsBytes + 96);
}

TEST_CASE("encoded bytes are little-endian") {
  Tensorf t(1, 1, 1, 1.0f);
  const auto bytes = encode_tensor(t);
  REQUIRE(bytes.size() == 28);
  CHECK(std::memcmp(bytes.data(), "JRNT", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 3);
  // 1.0f = 0x3f800000
  CHECK(bytes[24] == 0x00);
  CHECK(bytes[26] == 0x80);
  CHECK(bytes[27] == 0x3f);
}

TEST_CASE("malformed tensor bytes raise format errors with offsets") {
  const auto good = encode_tensor(Tensorf(2, 3, 4, 1.0f));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  try {
    decode_tensor(bad_magic);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }

  auto bad_version = good;
  bad_version[4] = 2;
  try {
    decode_tensor(bad_version);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 4);
  }

  auto zero_dim = good;
  std::fill(zero_dim.begin() + 16, zero_dim.begin() + 20, 0);
  try {
    decode_tensor(zero_dim);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 16);
  }

  auto huge = good;
  std::fill(huge.begin() + 12, huge.begin() + 24, 0xff);
  CHECK_THROWS_AS(decode_tensor(huge), FormatError);

  auto truncated = good;
  truncated.resize(good.size() - 1);
  try {
    decode_tensor(truncated);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 24);
  }
  CHECK_THROWS_AS(decode_tensor(std::vector<std::uint8_t>(good.begin(), good.begin() + 6)),
                  FormatError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_tensor(trailing), FormatError);
}

TEST_CASE("reading a missing tensor file is an I/O error") {
  CHECK_THROWS_AS(read_tensor("/nonexistent/dir/t.jrnt"), IoError);
}

TEST_CASE("checkpoint round trip preserves configuration and weights") {
  ScratchDir dir("io_ckpt");
  for (const auto& name : JrnConfig::variant_names()) {
    auto net = build_jrn(JrnConfig::variant(name, 11));
    net.depth_head.bias(0) = -0.0f;
    const auto path = dir.path() / (name + ".jrnw");
    write_checkpoint(net, path);
    const auto back = read_checkpoint(path);
    CHECK(back.config == net.config);
    CHECK(back == net);
    CHECK(std::signbit(back.depth_head.bias(0)));
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto bytes = encode_checkpoint(build_jrn(JrnConfig::variant("cat5", 1)));
  auto magic = bytes;
  magic[3] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(magic), FormatError);
  auto cut = bytes;
  cut.resize(bytes.size() - 4);
  CHECK_THROWS_AS(decode_checkpoint(cut), FormatError);
  auto fusion = bytes;
  fusion[8] = 7;
  CHECK_THROWS_AS(decode_checkpoint(fusion), FormatError);
}

TEST_CASE("labels travel as integral tensors") {
  LabelMap labels(2, 3);
  labels << 0, 1, 2, 3, 4, 0;
  CHECK((tensor_to_labels(labels_to_tensor(labels), 5).array() == labels.array()).all());
  Tensorf bad(1, 1, 1, 1.5f);
  CHECK_THROWS_AS(tensor_to_labels(bad, 5), DataError);
  bad(0, 0, 0) = 5.0f;
  CHECK_THROWS_AS(tensor_to_labels(bad, 5), DataError);
}

TEST_CASE("dataset round trip through the manifest") {
  ScratchDir dir("io_dataset");
  const auto samples = generate_dataset(3, 16, 5, NoiseConfig{});
  write_dataset(samples, dir.path());
  const auto loaded = load_dataset(dir.path() / "manifest.json");
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].id == samples[i].id);
    CHECK(bit_identical(loaded[i].input.depth, samples[i].input.depth));
    CHECK(bit_identical(loaded[i].input.semantics, samples[i].input.semantics));
    CHECK(bit_identical(loaded[i].truth.depth, samples[i].truth.depth));
    CHECK((loaded[i].truth.labels.array() == samples[i].truth.labels.array()).all());
    CHECK(loaded[i].truth.mask.count() == 16 * 16);
  }
}

TEST_CASE("manifest order is preserved") {
  ScratchDir dir("io_order");
  write_dataset(generate_dataset(3, 8, 2, NoiseConfig{}), dir.path());
  const auto manifest = dir.path() / "manifest.json";
  auto doc = read_manifest(manifest);
  std::swap(doc["samples"][0], doc["samples"][2]);
  rewrite_manifest(manifest, doc);
  const auto loaded = load_dataset(manifest);
  CHECK(loaded[0].id == "scene_0002");
  CHECK(loaded[2].id == "scene_0000");
}

TEST_CASE("an explicit mask is honoured") {
  ScratchDir dir("io_mask");
  write_dataset(generate_dataset(1, 8, 2, NoiseConfig{}), dir.path());
  Tensorf mask(1, 8, 8, 1.0f);
  mask(0, 0, 0) = 0.0f;
  mask(0, 7, 7) = 0.0f;
  write_tensor(mask, dir.path() / "mask.jrnt");
  const auto manifest = dir.path() / "manifest.json";
  auto doc = read_manifest(manifest);
  doc["samples"][0]["mask"] = "mask.jrnt";
  rewrite_manifest(manifest, doc);
  const auto loaded = load_dataset(manifest);
  CHECK(loaded[0].truth.mask.count() == 62);
  CHECK_FALSE(loaded[0].truth.mask.valid(0, 0));
}

TEST_CASE("load errors name the offending sample") {
  ScratchDir dir("io_errors");
  write_dataset(generate_dataset(3, 16, 5, NoiseConfig{}), dir.path());
  const auto manifest = dir.path() / "manifest.json";

  write_tensor(Tensorf(1, 8, 16, 0.0f), dir.path() / "scene_0001" / "gt_labels.jrnt");
  try {
    load_dataset(manifest);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("scene_0001") != std::string::npos);
  }

  std::filesystem::remove(dir.path() / "scene_0001" / "gt_labels.jrnt");
  try {
    load_dataset(manifest);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("scene_0001") != std::string::npos);
  }

  write_tensor(Tensorf(1, 16, 16, 0.0f), dir.path() / "scene_0002" / "gt_depth.jrnt");
  write_tensor(Tensorf(1, 16, 16, 0.0f), dir.path() / "scene_0001" / "gt_labels.jrnt");
  try {
    load_dataset(manifest);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("scene_0002") != std::string::npos);
  }

  CHECK_THROWS_AS(load_dataset(dir.path() / "missing.json"), LoadError);
  std::ofstream(dir.path() / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_dataset(dir.path() / "broken.json"), LoadError);
}
