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

#include "anyprop/memory.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anyprop/parallel.h"
#include "anyprop/status.h"

namespace anyprop {

MemoryBank::MemoryBank(int capacity, double temperature)
    : capacity_(capacity), temperature_(temperature) {
  if (capacity < 1) throw InvalidArgumentError("memory capacity must be >= 1");
  if (!(temperature > 0.0)) {
    throw InvalidArgumentError("memory temperature must be > 0");
  }
}

void MemoryBank::Push(FeatureMap feature, TimeUs timestamp) {
  if (!entries_.empty()) {
    if (timestamp <= entries_.back().timestamp) {
      throw InvalidArgumentError(
          "memory push at " + std::to_string(timestamp) +
          " us is not after the last entry (" +
          std::to_string(entries_.back().timestamp) + " us)");
    }
    const FeatureMap& last = entries_.back().feature;
    if (last.channels() != feature.channels() ||
        !(last.dims() == feature.dims())) {
      throw InvalidArgumentError("memory push: feature shape changed");
    }
  }
  feature.set_timestamp(timestamp);
  entries_.push_back(Entry{timestamp, std::move(feature)});
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

void MemoryBank::CheckQuery(const FeatureMap& query) const {
  if (entries_.empty()) return;
  const FeatureMap& ref = entries_.front().feature;
  if (ref.channels() != query.channels() || !(ref.dims() == query.dims())) {
    throw InvalidArgumentError("memory query shape " +
                               std::to_string(query.channels()) + "x" +
                               ToString(query.dims()) +
                               " does not match stored " +
                               std::to_string(ref.channels()) + "x" +
                               ToString(ref.dims()));
  }
}

std::vector<double> MemoryBank::Weights(const FeatureMap& query, int y,
                                        int x) const {
  CheckQuery(query);
  const int channels = query.channels();
  const double scale =
      1.0 / (temperature_ * std::sqrt(static_cast<double>(channels)));
  std::vector<double> logits;
  logits.reserve(entries_.size() + 1);
  auto dot = [&](const FeatureMap& f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += query.at(c, y, x) * f.at(c, y, x);
    return acc * scale;
  };
  for (const Entry& e : entries_) logits.push_back(dot(e.feature));
  logits.push_back(dot(query));
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

FeatureMap MemoryBank::Enhance(const FeatureMap& query) const {
  CheckQuery(query);
  if (entries_.empty()) return query;
  const Dims& dims = query.dims();
  const int channels = query.channels();
  FeatureMap out(channels, dims, query.semantics(), query.timestamp());
  ParallelFor(dims.height, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        const std::vector<double> w = Weights(query, y, x);
        // Written as query plus weighted deviations (the self-entry adds
        // none), which leaves pixels whose candidates all agree bit-exact.
        for (int c = 0; c < channels; ++c) {
          const double q = query.at(c, y, x);
          double dev = 0.0;
          for (std::size_t i = 0; i < entries_.size(); ++i) {
            dev += w[i] * (entries_[i].feature.at(c, y, x) - q);
          }
          out.at(c, y, x) = q + dev;
        }
      }
    }
  });
  return out;
}

}  // namespace anyprop
