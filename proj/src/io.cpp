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

#include "jrn/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

#include "jrn/errors.hpp"

namespace jrn {

namespace {

constexpr char kTensorMagic[4] = {'J', 'R', 'N', 'T'};
constexpr char kCheckpointMagic[4] = {'J', 'R', 'N', 'W'};
// Refuse to allocate more than this many values from an untrusted header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

class ByteWriter {
 public:
  void magic(const char (&m)[4]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  template <typename Array>
  void f32s(const Array& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) u32(std::bit_cast<std::uint32_t>(values[i]));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::size_t offset() const { return pos_; }

  void magic(const char (&m)[4]) {
    need(4, "magic");
    for (int i = 0; i < 4; ++i) {
      if (bytes_[pos_ + static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(m[i])) {
        throw FormatError(std::string(what_) + ": bad magic, expected \"" + std::string(m, 4) + "\"",
                          pos_);
      }
    }
    pos_ += 4;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  template <typename Array>
  void f32s(Array& values, const char* field) {
    need(static_cast<std::size_t>(values.size()) * 4, field);
    for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = std::bit_cast<float>(u32(field));
  }
  void finish() {
    if (pos_ != bytes_.size()) {
      throw FormatError(std::string(what_) + ": " + std::to_string(bytes_.size() - pos_) +
                            " trailing bytes",
                        pos_);
    }
  }

 private:
  void need(std::size_t n, const char* field) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated while reading " + field, pos_);
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensorf& t) {
  if (t.empty()) throw UsageError("cannot encode an empty tensor");
  ByteWriter out;
  out.magic(kTensorMagic);
  out.u32(kTensorFormatVersion);
  out.u32(3);
  out.u32(static_cast<std::uint32_t>(t.channels()));
  out.u32(static_cast<std::uint32_t>(t.height()));
  out.u32(static_cast<std::uint32_t>(t.width()));
  out.f32s(t.data());
  return out.take();
}

Tensorf decode_tensor(const std::vector<std::uint8_t>& bytes) {
  ByteReader in(bytes, "tensor");
  in.magic(kTensorMagic);
  const auto version_at = in.offset();
  if (in.u32("version") != kTensorFormatVersion) {
    throw FormatError("tensor: unsupported format version", version_at);
  }
  const auto ndim_at = in.offset();
  if (in.u32("ndim") != 3) throw FormatError("tensor: ndim must be 3", ndim_at);
  std::uint64_t dims[3];
  std::uint64_t total = 1;
  for (auto& d : dims) {
    const auto at = in.offset();
    d = in.u32("dimension");
    total *= d;
    if (d == 0 || total > kMaxElements) {
      throw FormatError("tensor: dimension " + std::to_string(d) + " is zero or overflows", at);
    }
  }
  Tensorf t(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]),
            static_cast<Eigen::Index>(dims[2]));
  in.f32s(t.data(), "tensor data");
  in.finish();
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

void write_tensor(const Tensorf& t, const std::filesystem::path& path) {
  write_file_bytes(encode_tensor(t), path);
}

Tensorf read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> encode_checkpoint(const JrnNetwork<float>& net) {
  net.config.validate();
  ByteWriter out;
  out.magic(kCheckpointMagic);
  out.u32(kCheckpointFormatVersion);
  const auto& c = net.config;
  out.u32(static_cast<std::uint32_t>(c.fusion));
  out.u32(static_cast<std::uint32_t>(c.post_fusion_channels));
  out.u32(static_cast<std::uint32_t>(c.branch_output_channels));
  out.u32(static_cast<std::uint32_t>(c.num_classes));
  out.u32(static_cast<std::uint32_t>(c.branch_feature_channels));
  out.u32(static_cast<std::uint32_t>(c.scale_divisors.size()));
  for (int d : c.scale_divisors) out.u32(static_cast<std::uint32_t>(d));
  out.u64(c.rng_seed);
  const auto layers = net.layers();
  out.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto* layer : layers) {
    out.u32(4);
    out.u32(static_cast<std::uint32_t>(layer->out_channels));
    out.u32(static_cast<std::uint32_t>(layer->in_channels));
    out.u32(static_cast<std::uint32_t>(layer->kernel));
    out.u32(static_cast<std::uint32_t>(layer->kernel));
    out.f32s(layer->weights);
    out.u32(1);
    out.u32(static_cast<std::uint32_t>(layer->out_channels));
    out.f32s(layer->bias);
  }
  return out.take();
}

JrnNetwork<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ByteReader in(bytes, "checkpoint");
  in.magic(kCheckpointMagic);
  const auto version_at = in.offset();
  if (in.u32("version") != kCheckpointFormatVersion) {
    throw FormatError("checkpoint: unsupported format version", version_at);
  }
  const auto config_at = in.offset();
  JrnConfig config;
  const auto fusion = in.u32("fusion");
  if (fusion > 1) throw FormatError("checkpoint: unknown fusion op", config_at);
  config.fusion = static_cast<FusionOp>(fusion);
  config.post_fusion_channels = static_cast<int>(in.u32("C0"));
  config.branch_output_channels = static_cast<int>(in.u32("C"));
  config.num_classes = static_cast<int>(in.u32("num_classes"));
  config.branch_feature_channels = static_cast<int>(in.u32("feature width"));
  const auto scales = in.u32("scale count");
  if (scales > 16) throw FormatError("checkpoint: implausible scale count", in.offset() - 4);
  config.scale_divisors.clear();
  for (std::uint32_t s = 0; s < scales; ++s) {
    config.scale_divisors.push_back(static_cast<int>(in.u32("scale divisor")));
  }
  config.rng_seed = in.u64("seed");
  if (config.num_classes > 4096) throw FormatError("checkpoint: implausible class count", config_at);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what(), config_at);
  }

  auto net = JrnNetwork<float>::zeros(config);
  auto layers = net.layers();
  const auto count_at = in.offset();
  if (in.u32("layer count") != layers.size()) {
    throw FormatError("checkpoint: layer count does not match configuration", count_at);
  }
  for (auto* layer : layers) {
    const auto dims_at = in.offset();
    const std::uint32_t expect_w[5] = {4, static_cast<std::uint32_t>(layer->out_channels),
                                       static_cast<std::uint32_t>(layer->in_channels),
                                       static_cast<std::uint32_t>(layer->kernel),
                                       static_cast<std::uint32_t>(layer->kernel)};
    for (auto e : expect_w) {
      if (in.u32("weight dims") != e) {
        throw FormatError("checkpoint: weight shape does not match configuration", dims_at);
      }
    }
    in.f32s(layer->weights, "weights");
    const auto bias_at = in.offset();
    if (in.u32("bias dims") != 1 ||
        in.u32("bias dims") != static_cast<std::uint32_t>(layer->out_channels)) {
      throw FormatError("checkpoint: bias shape does not match configuration", bias_at);
    }
    in.f32s(layer->bias, "bias");
  }
  in.finish();
  return net;
}

void write_checkpoint(const JrnNetwork<float>& net, const std::filesystem::path& path) {
  write_file_bytes(encode_checkpoint(net), path);
}

JrnNetwork<float> read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

Tensorf labels_to_tensor(const LabelMap& labels) {
  Tensorf t(1, labels.rows(), labels.cols());
  t.plane(0) = labels.cast<float>();
  return t;
}

LabelMap tensor_to_labels(const Tensorf& t, int num_classes) {
  if (t.channels() != 1) throw DataError("label map must have one channel, got " + t.shape_string());
  LabelMap labels(t.height(), t.width());
  for (Eigen::Index y = 0; y < t.height(); ++y) {
    for (Eigen::Index x = 0; x < t.width(); ++x) {
      const float v = t(0, y, x);
      if (!(v >= 0.0f && v < static_cast<float>(num_classes)) || std::floor(v) != v) {
        throw DataError("label value " + std::to_string(v) + " at (" + std::to_string(y) + ", " +
                        std::to_string(x) + ") is not a class index in [0, " +
                        std::to_string(num_classes) + ")");
      }
      labels(y, x) = static_cast<std::int32_t>(v);
    }
  }
  return labels;
}

namespace {

Sample load_sample(const nlohmann::json& entry, const std::filesystem::path& base, int k) {
  const std::string id = entry.value("id", std::string("<unnamed>"));
  try {
    for (const char* key : {"id", "input_depth", "input_sem", "gt_depth", "gt_labels"}) {
      if (!entry.contains(key) || !entry[key].is_string()) {
        throw DataError(std::string("missing string field '") + key + "'");
      }
    }
    auto path = [&](const char* key) { return base / entry[key].get<std::string>(); };
    Sample s;
    s.id = id;
    s.input.depth = read_tensor(path("input_depth"));
    s.input.semantics = read_tensor(path("input_sem"));
    s.truth.depth = read_tensor(path("gt_depth"));
    const Tensorf labels = read_tensor(path("gt_labels"));

    const auto& ref = s.truth.depth;
    if (ref.channels() != 1) throw DataError("gt_depth must have one channel");
    if (s.input.depth.channels() != 1) throw DataError("input_depth must have one channel");
    if (s.input.semantics.channels() != k) {
      throw DataError("input_sem has " + std::to_string(s.input.semantics.channels()) +
                      " channels, expected " + std::to_string(k));
    }
    for (const Tensorf* t : std::initializer_list<const Tensorf*>{&s.input.depth, &s.input.semantics, &labels}) {
      if (!t->same_spatial(ref)) {
        throw DataError("spatial size " + t->shape_string() + " does not match gt_depth " +
                        ref.shape_string());
      }
    }
    if (ref.height() % 8 != 0 || ref.width() % 8 != 0) {
      throw DataError("size " + ref.shape_string() + " is not divisible by 8");
    }
    s.truth.labels = tensor_to_labels(labels, k);

    if (entry.contains("mask") && !entry["mask"].is_null()) {
      const Tensorf m = read_tensor(path("mask"));
      if (m.channels() != 1 || !m.same_spatial(ref)) throw DataError("mask shape mismatch");
      s.truth.mask.valid = m.plane(0) != 0.0f;
    } else {
      s.truth.mask = ValidMask::all(ref.height(), ref.width());
    }
    if (s.truth.mask.count() < 1) throw DataError("mask has no valid pixels");

    for (Eigen::Index y = 0; y < ref.height(); ++y) {
      for (Eigen::Index x = 0; x < ref.width(); ++x) {
        if (s.truth.mask.valid(y, x) && !(ref(0, y, x) > 0.0f && std::isfinite(ref(0, y, x)))) {
          throw DataError("ground-truth depth must be positive at valid pixels");
        }
      }
    }
    if (!s.input.depth.all_finite() || !s.input.semantics.all_finite()) {
      throw DataError("input predictions contain non-finite values");
    }
    return s;
  } catch (const Error& e) {
    throw LoadError("sample '" + id + "': " + e.what());
  }
}

}  // namespace

namespace {

nlohmann::json read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) throw LoadError("cannot open manifest '" + manifest_path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("manifest '" + manifest_path.string() + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array()) {
    throw LoadError("manifest '" + manifest_path.string() + "' has no 'samples' array");
  }
  if (doc["samples"].empty()) throw LoadError("manifest '" + manifest_path.string() + "' lists no samples");
  return doc;
}

}  // namespace

int dataset_num_classes(const std::filesystem::path& manifest_path) {
  const auto doc = read_manifest(manifest_path);
  const auto& first = doc["samples"][0];
  if (!first.is_object() || !first.contains("input_sem") || !first["input_sem"].is_string()) {
    throw LoadError("manifest '" + manifest_path.string() + "': first sample has no input_sem");
  }
  try {
    const auto t = read_tensor(manifest_path.parent_path() / first["input_sem"].get<std::string>());
    return static_cast<int>(t.channels());
  } catch (const Error& e) {
    throw LoadError("manifest '" + manifest_path.string() + "': " + e.what());
  }
}

std::vector<Sample> load_dataset(const std::filesystem::path& manifest_path, int num_classes) {
  const auto doc = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  std::vector<Sample> samples;
  for (const auto& entry : doc["samples"]) {
    if (!entry.is_object()) throw LoadError("manifest entry is not an object");
    samples.push_back(load_sample(entry, base, num_classes));
  }
  return samples;
}

void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& s : samples) {
    const auto dir = out_dir / s.id;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    write_tensor(s.input.depth, dir / "input_depth.jrnt");
    write_tensor(s.input.semantics, dir / "input_sem.jrnt");
    write_tensor(s.truth.depth, dir / "gt_depth.jrnt");
    write_tensor(labels_to_tensor(s.truth.labels), dir / "gt_labels.jrnt");
    entries.push_back({{"id", s.id},
                       {"input_depth", s.id + "/input_depth.jrnt"},
                       {"input_sem", s.id + "/input_sem.jrnt"},
                       {"gt_depth", s.id + "/gt_depth.jrnt"},
                       {"gt_labels", s.id + "/gt_labels.jrnt"}});
  }
  std::ofstream f(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write manifest in '" + out_dir.string() + "'");
  f << nlohmann::json{{"samples", entries}}.dump(2) << '\n';
}

}  // namespace jrn
