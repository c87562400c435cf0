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

#ifndef ANYPROP_MEMORY_H_
#define ANYPROP_MEMORY_H_

#include <deque>
#include <utility>

#include "anyprop/tensor.h"

namespace anyprop {

// FIFO store of deep features keyed by strictly increasing timestamps.
class MemoryBank {
 public:
  struct Entry {
    TimeUs timestamp;
    FeatureMap feature;
  };

  static constexpr int kDefaultCapacity = 4;
  static constexpr double kDefaultTemperature = 1.0;

  explicit MemoryBank(int capacity = kDefaultCapacity,
                      double temperature = kDefaultTemperature);

  // Appends and evicts the oldest entry when over capacity. Throws
  // InvalidArgumentError unless timestamp > the last stored one and the
  // feature shape matches earlier entries.
  void Push(FeatureMap feature, TimeUs timestamp);

  // Per-pixel softmax attention over the stored entries plus the query
  // itself: w_i ~ exp(<q, e_i> / (tau * sqrt(C))), output = sum_i w_i e_i.
  FeatureMap Enhance(const FeatureMap& query) const;

  // Attention weights at one pixel, self-entry last.
  std::vector<double> Weights(const FeatureMap& query, int y, int x) const;

  const std::deque<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int capacity() const { return capacity_; }
  double temperature() const { return temperature_; }
  void Clear() { entries_.clear(); }

 private:
  void CheckQuery(const FeatureMap& query) const;

  int capacity_;
  double temperature_;
  std::deque<Entry> entries_;
};

}  // namespace anyprop

#endif  // ANYPROP_MEMORY_H_
