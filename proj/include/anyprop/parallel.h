/* Copyright 2026 The AnyProp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ANYPROP_PARALLEL_H_
#define ANYPROP_PARALLEL_H_

#include <functional>
#include <optional>

namespace anyprop {

// Number of worker threads used by the internal parallel loops. Read from
// ANYPROP_THREADS; 0 (or 1) selects the sequential reference path. Unset means
// std::thread::hardware_concurrency().
int ThreadCount();

// Test hook: overrides the environment until reset with std::nullopt.
void SetThreadCountOverride(std::optional<int> threads);

// Calls fn(begin, end) on contiguous chunks covering [0, n). Chunk boundaries
// depend only on n and the thread count, and every chunk writes disjoint
// output, so results never depend on scheduling.
void ParallelFor(int n, const std::function<void(int, int)>& fn);

}  // namespace anyprop

#endif  // ANYPROP_PARALLEL_H_
