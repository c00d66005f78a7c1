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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jrn/model.hpp"
#include "jrn/sample.hpp"
#include "jrn/tensor.hpp"

namespace jrn {

/// Tensor container, all integers little-endian:
///   "JRNT" | u32 version = 1 | u32 ndim = 3 | u32 C | u32 H | u32 W |
///   C*H*W IEEE-754 binary32 values, channel-major then row-major.
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 12;  // magic, version, ndim
inline constexpr std::size_t kTensorDimsBytes = 12;

std::vector<std::uint8_t> encode_tensor(const Tensorf& t);
/// Throws FormatError carrying the byte offset of the first bad field.
Tensorf decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const Tensorf& t, const std::filesystem::path& path);
Tensorf read_tensor(const std::filesystem::path& path);

/// Network checkpoint:
///   "JRNW" | u32 version = 1 |
///   config: u32 fusion (0 concat, 1 sum) | u32 C0 | u32 C | u32 k |
///           u32 feature width | u32 scale count | u32 divisor per scale |
///           u64 seed |
///   u32 layer count | per layer in declaration order:
///           u32 4 | u32 out | u32 in | u32 kh | u32 kw | weights (f32) |
///           u32 1 | u32 out | bias (f32)
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const JrnNetwork<float>& net);
JrnNetwork<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const JrnNetwork<float>& net, const std::filesystem::path& path);
JrnNetwork<float> read_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path);

/// Label maps travel as 1 x H x W tensors holding integral reals.
Tensorf labels_to_tensor(const LabelMap& labels);
LabelMap tensor_to_labels(const Tensorf& t, int num_classes);

/// Reads a manifest of the form
///   {"samples": [{"id", "input_depth", "input_sem", "gt_depth",
///                 "gt_labels", "mask"?}]}
/// with paths relative to the manifest. Every sample is validated eagerly;
/// failures raise LoadError naming the sample id. A missing mask means all
/// pixels are valid; a mask file is a 1 x H x W tensor of 0/1 values.
std::vector<Sample> load_dataset(const std::filesystem::path& manifest_path, int num_classes = 5);

/// Class count of a dataset, read from the first sample's input semantics.
int dataset_num_classes(const std::filesystem::path& manifest_path);

/// Writes one directory per sample plus manifest.json under out_dir.
void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& out_dir);

}  // namespace jrn
