// Copyright 2026 The helioprop Authors.
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

#ifndef HELIOPROP_PARALLEL_HPP
#define HELIOPROP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace helioprop {

/// Worker count: HELIOPROP_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous chunks,
/// one per worker. Callers must write only to per-index outputs; any
/// reduction happens afterwards in index order, so results never depend on
/// the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace helioprop

#endif  // HELIOPROP_PARALLEL_HPP
