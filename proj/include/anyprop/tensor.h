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

#ifndef ANYPROP_TENSOR_H_
#define ANYPROP_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace anyprop {

// Timestamps are integer microseconds throughout.
using TimeUs = std::int64_t;

struct Dims {
  int height = 0;
  int width = 0;

  std::size_t area() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool operator==(const Dims&) const = default;
};

std::string ToString(const Dims& dims);

// Row-major H x W grid.
template <typename T>
class Plane {
 public:
  Plane() = default;
  explicit Plane(Dims dims, T fill = T{})
      : dims_(dims), data_(dims.area(), fill) {}

  const Dims& dims() const { return dims_; }
  int height() const { return dims_.height; }
  int width() const { return dims_.width; }

  T& at(int y, int x) { return data_[index(y, x)]; }
  const T& at(int y, int x) const { return data_[index(y, x)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(x);
  }
  std::size_t size() const { return data_.size(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Plane&) const = default;

 private:
  Dims dims_;
  std::vector<T> data_;
};

using Mask = Plane<std::uint8_t>;

// Per-pixel displacement (pixels): a source pixel q maps to q + (u, v).
struct FlowField {
  Plane<double> u;
  Plane<double> v;

  FlowField() = default;
  explicit FlowField(Dims dims) : u(dims, 0.0), v(dims, 0.0) {}
  const Dims& dims() const { return u.dims(); }
  bool operator==(const FlowField&) const = default;
};

// Per-pixel log-precision of a flow field.
struct ConfidenceMap {
  Plane<double> s;

  ConfidenceMap() = default;
  explicit ConfidenceMap(Dims dims, double fill = 0.0) : s(dims, fill) {}
  const Dims& dims() const { return s.dims(); }
  bool operator==(const ConfidenceMap&) const = default;
};

enum class ChannelSemantics { kIntensity, kClassProb, kGeneric };

const char* ToString(ChannelSemantics semantics);

// Dense C x H x W map, channel-major then row-major.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, Dims dims, ChannelSemantics semantics,
             TimeUs timestamp = 0);

  int channels() const { return channels_; }
  const Dims& dims() const { return dims_; }
  ChannelSemantics semantics() const { return semantics_; }
  void set_semantics(ChannelSemantics s) { semantics_ = s; }
  TimeUs timestamp() const { return timestamp_; }
  void set_timestamp(TimeUs t) { timestamp_ = t; }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * dims_.area()) +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(x);
  }
  std::size_t plane_size() const { return dims_.area(); }
  std::span<double> channel(int c) {
    return std::span<double>(data_).subspan(c * dims_.area(), dims_.area());
  }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(c * dims_.area(),
                                                  dims_.area());
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  int channels_ = 0;
  Dims dims_;
  ChannelSemantics semantics_ = ChannelSemantics::kGeneric;
  TimeUs timestamp_ = 0;
  std::vector<double> data_;
};

}  // namespace anyprop

#endif  // ANYPROP_TENSOR_H_
