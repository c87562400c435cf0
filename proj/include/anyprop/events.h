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

#ifndef ANYPROP_EVENTS_H_
#define ANYPROP_EVENTS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "anyprop/tensor.h"

namespace anyprop {

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  TimeUs t = 0;
  std::int8_t p = 1;  // +1 or -1

  bool operator==(const Event&) const = default;
};

// Closed time interval a stream is known to describe. A window without events
// inside a covered span means "no brightness change", not "no data".
struct TimeSpan {
  TimeUs begin = 0;
  TimeUs end = 0;
  bool Covers(TimeUs t0, TimeUs t1) const { return begin <= t0 && t1 <= end; }
  bool operator==(const TimeSpan&) const = default;
};

// Time-sorted events on an H x W sensor. Construction validates ordering,
// bounds and polarity, so every EventStream in circulation is well formed.
class EventStream {
 public:
  EventStream() = default;
  // The span defaults to [first event, last event].
  EventStream(Dims sensor_dims, std::vector<Event> events);
  EventStream(Dims sensor_dims, std::vector<Event> events, TimeSpan span);

  const Dims& dims() const { return dims_; }
  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  TimeUs first_time() const { return events_.front().t; }
  TimeUs last_time() const { return events_.back().t; }
  const TimeSpan& span() const { return span_; }

  // Compares sensor size and events; the span is metadata.
  bool operator==(const EventStream& other) const {
    return dims_ == other.dims_ && events_ == other.events_;
  }

 private:
  Dims dims_;
  std::vector<Event> events_;
  TimeSpan span_;
};

// Events with t0 <= t < t1, order preserved; the result spans [t0, t1].
EventStream Slice(const EventStream& stream, TimeUs t0, TimeUs t1);

inline constexpr int kDefaultBins = 4;

// B x H x W temporal bins over the window [t0, t1].
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int bins, Dims dims, TimeUs t0, TimeUs t1);

  int bins() const { return bins_; }
  const Dims& dims() const { return dims_; }
  TimeUs t0() const { return t0_; }
  TimeUs t1() const { return t1_; }

  double& at(int b, int y, int x) { return data_[index(b, y, x)]; }
  double at(int b, int y, int x) const { return data_[index(b, y, x)]; }
  std::size_t index(int b, int y, int x) const {
    return static_cast<std::size_t>(b) * dims_.area() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(x);
  }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  // Sum over bins of |E(u, b)| at each pixel.
  Plane<double> AbsEnergy() const;
  double Sum() const;

  bool operator==(const VoxelGrid&) const = default;

 private:
  int bins_ = 0;
  Dims dims_;
  TimeUs t0_ = 0;
  TimeUs t1_ = 0;
  std::vector<double> data_;
};

// Accumulates each event's polarity into the two temporal bins adjacent to
// t* = (B-1)(t - t0)/(t1 - t0) with the triangular kernel max(0, 1 - |t* - b|).
// Events outside [t0, t1] are ignored. Per-cell accumulation follows stream
// order, so the threaded path is bit-identical to the sequential one.
VoxelGrid Voxelize(const EventStream& stream, TimeUs t0, TimeUs t1,
                   int bins = kDefaultBins);
VoxelGrid Voxelize(const EventStream& stream, TimeUs t0, TimeUs t1, int bins,
                   Dims dims);

enum class EventFormat { kCsv, kBinary };

EventFormat EventFormatFromPath(const std::filesystem::path& path);

// CSV: header "t_us,x,y,p" then one event per line. The sensor size is carried
// in an optional leading "# dims H W" comment; without it the size is the
// bounding box of the events.
// Binary: "EVS1", u16 H, u16 W, u64 count, count x (u64 t, u16 x, u16 y, i8 p,
// pad byte), little-endian.
void WriteEvents(const EventStream& stream, std::ostream& out,
                 EventFormat format);
EventStream ReadEvents(std::istream& in, EventFormat format);

void WriteEvents(const EventStream& stream, const std::filesystem::path& path,
                 EventFormat format);
EventStream ReadEvents(const std::filesystem::path& path, EventFormat format);

// VOX1: u16 B, u16 H, u16 W, i64 t0, i64 t1, then B*H*W f32.
void WriteVoxelGrid(const VoxelGrid& grid, const std::filesystem::path& path);
VoxelGrid ReadVoxelGrid(const std::filesystem::path& path);

}  // namespace anyprop

#endif  // ANYPROP_EVENTS_H_
