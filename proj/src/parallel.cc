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

#include "anyprop/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace anyprop {
namespace {

std::atomic<int> g_override{-1};

int ThreadsFromEnv() {
  const char* env = std::getenv("ANYPROP_THREADS");
  if (env == nullptr || *env == '\0') {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  try {
    return std::max(0, std::stoi(env));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int ThreadCount() {
  const int forced = g_override.load();
  return forced >= 0 ? forced : ThreadsFromEnv();
}

void SetThreadCountOverride(std::optional<int> threads) {
  g_override.store(threads.has_value() ? std::max(0, *threads) : -1);
}

void ParallelFor(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  const int threads = std::min(ThreadCount(), n);
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads - 1);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(n, chunk));
  for (auto& w : workers) w.join();
}

}  // namespace anyprop
