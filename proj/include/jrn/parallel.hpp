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

#include <Eigen/Core>

#include <functional>

namespace jrn {

/// Number of worker threads used inside kernels. Results do not depend on
/// this value: work is split over independent output slices only.
void set_worker_threads(int count);
int worker_threads();

/// Runs body(i) for i in [0, n), split into contiguous chunks across the
/// configured workers. Runs inline when one worker is configured.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body);

}  // namespace jrn
