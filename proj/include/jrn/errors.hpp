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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jrn {

/// Base of every error raised by the library. The CLI maps these onto exit
/// codes: UsageError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid architecture or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// API misuse: backward before forward, mismatched optimizer state, ...
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Values violate a data precondition (nonpositive depth, label out of range).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or truncated binary container.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Dataset manifest could not be loaded; the message names the sample id.
class LoadError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace jrn
