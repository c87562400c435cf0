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

#include "anyprop/events.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "anyprop/parallel.h"
#include "anyprop/status.h"
#include "binary_io.h"

namespace anyprop {

EventStream::EventStream(Dims sensor_dims, std::vector<Event> events)
    : EventStream(sensor_dims, std::move(events), TimeSpan{}) {
  if (!events_.empty()) span_ = TimeSpan{events_.front().t, events_.back().t};
}

EventStream::EventStream(Dims sensor_dims, std::vector<Event> events,
                         TimeSpan span)
    : dims_(sensor_dims), events_(std::move(events)), span_(span) {
  if (span_.end < span_.begin) {
    throw FormatError("event stream span ends before it begins");
  }
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.p != 1 && e.p != -1) {
      throw FormatError("event " + std::to_string(i) + ": polarity " +
                        std::to_string(e.p) + " not in {-1, +1}");
    }
    if (!dims_.contains(e.x, e.y)) {
      throw FormatError("event " + std::to_string(i) + " at (" +
                        std::to_string(e.x) + "," + std::to_string(e.y) +
                        ") outside sensor " + ToString(dims_));
    }
    if (e.t < 0) {
      throw FormatError("event " + std::to_string(i) + ": negative timestamp");
    }
    if (i > 0 && e.t < events_[i - 1].t) {
      throw FormatError("event " + std::to_string(i) +
                        ": timestamps not sorted (" + std::to_string(e.t) +
                        " < " + std::to_string(events_[i - 1].t) + ")");
    }
  }
}

EventStream Slice(const EventStream& stream, TimeUs t0, TimeUs t1) {
  if (t1 < t0) {
    throw InvalidArgumentError("Slice: t1 < t0");
  }
  auto events = stream.events();
  auto lo = std::lower_bound(
      events.begin(), events.end(), t0,
      [](const Event& e, TimeUs t) { return e.t < t; });
  auto hi = std::lower_bound(
      lo, events.end(), t1, [](const Event& e, TimeUs t) { return e.t < t; });
  return EventStream(stream.dims(), std::vector<Event>(lo, hi),
                     TimeSpan{t0, t1});
}

VoxelGrid::VoxelGrid(int bins, Dims dims, TimeUs t0, TimeUs t1)
    : bins_(bins),
      dims_(dims),
      t0_(t0),
      t1_(t1),
      data_(static_cast<std::size_t>(bins) * dims.area(), 0.0) {}

Plane<double> VoxelGrid::AbsEnergy() const {
  Plane<double> energy(dims_, 0.0);
  for (int b = 0; b < bins_; ++b) {
    for (std::size_t i = 0; i < dims_.area(); ++i) {
      energy[i] += std::abs(data_[b * dims_.area() + i]);
    }
  }
  return energy;
}

double VoxelGrid::Sum() const {
  double total = 0.0;
  for (double v : data_) total += v;
  return total;
}

VoxelGrid Voxelize(const EventStream& stream, TimeUs t0, TimeUs t1, int bins) {
  return Voxelize(stream, t0, t1, bins, stream.dims());
}

VoxelGrid Voxelize(const EventStream& stream, TimeUs t0, TimeUs t1, int bins,
                   Dims dims) {
  if (t1 <= t0) {
    throw InvalidArgumentError("Voxelize: empty window [" + std::to_string(t0) +
                               ", " + std::to_string(t1) + "]");
  }
  if (bins < 2) {
    throw InvalidArgumentError("Voxelize: need at least 2 bins, got " +
                               std::to_string(bins));
  }
  if (!(dims == stream.dims())) {
    throw InvalidArgumentError("Voxelize: dims " + ToString(dims) +
                               " do not match stream " +
                               ToString(stream.dims()));
  }
  VoxelGrid grid(bins, dims, t0, t1);
  const auto events = stream.events();
  const double span = static_cast<double>(t1 - t0);
  // Each worker owns a band of rows and walks the whole stream in order, so
  // every cell sees its contributions in event order regardless of threads.
  ParallelFor(dims.height, [&](int row_begin, int row_end) {
    for (const Event& e : events) {
      if (e.t < t0 || e.t > t1) continue;
      if (e.y < row_begin || e.y >= row_end) continue;
      // (B-1)(t-t0) is exact in integers, leaving one rounded division.
      const double t_star =
          static_cast<double>(static_cast<TimeUs>(bins - 1) * (e.t - t0)) / span;
      const int lower = std::min(static_cast<int>(std::floor(t_star)), bins - 1);
      for (int b = lower; b <= std::min(lower + 1, bins - 1); ++b) {
        const double w = std::max(0.0, 1.0 - std::abs(t_star - b));
        if (w > 0.0) grid.at(b, e.y, e.x) += e.p * w;
      }
    }
  });
  return grid;
}

EventFormat EventFormatFromPath(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return EventFormat::kCsv;
  if (ext == ".bin" || ext == ".evs") return EventFormat::kBinary;
  throw InvalidArgumentError("cannot infer event format from '" +
                             path.string() + "' (use .csv or .bin)");
}

namespace {

constexpr std::string_view kCsvHeader = "t_us,x,y,p";
constexpr std::string_view kEventMagic = "EVS1";

template <typename T>
T ParseField(std::string_view field, std::int64_t line, const char* name) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line) + ": bad " + name +
                         " field '" + std::string(field) + "'",
                     line);
  }
  return value;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

EventStream ReadCsv(std::istream& in) {
  std::string line;
  std::int64_t line_no = 0;
  bool have_header = false;
  Dims dims;
  bool have_dims = false;
  std::vector<Event> events;
  int max_x = -1;
  int max_y = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = Trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      std::istringstream meta{std::string(view.substr(1))};
      std::string key;
      meta >> key;
      if (key == "dims") {
        if (!(meta >> dims.height >> dims.width) || dims.height <= 0 ||
            dims.width <= 0) {
          throw ParseError("line " + std::to_string(line_no) +
                               ": malformed dims comment",
                           line_no);
        }
        have_dims = true;
      }
      continue;
    }
    if (!have_header) {
      if (view != kCsvHeader) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": expected header '" + std::string(kCsvHeader) +
                             "'",
                         line_no);
      }
      have_header = true;
      continue;
    }
    std::string_view fields[4];
    std::size_t start = 0;
    int n = 0;
    for (std::size_t i = 0; i <= view.size(); ++i) {
      if (i == view.size() || view[i] == ',') {
        if (n == 4) {
          n = 5;
          break;
        }
        fields[n++] = Trim(view.substr(start, i - start));
        start = i + 1;
      }
    }
    if (n != 4) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": expected 4 fields",
                       line_no);
    }
    const auto t = ParseField<std::int64_t>(fields[0], line_no, "t_us");
    const auto x = ParseField<int>(fields[1], line_no, "x");
    const auto y = ParseField<int>(fields[2], line_no, "y");
    const auto p = ParseField<int>(fields[3], line_no, "p");
    if (p != 1 && p != -1) {
      throw ParseError("line " + std::to_string(line_no) + ": polarity " +
                           std::to_string(p) + " not in {-1, 1}",
                       line_no);
    }
    if (x < 0 || y < 0 || x > 0xFFFF || y > 0xFFFF || t < 0) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": coordinate or timestamp out of range",
                       line_no);
    }
    if (!events.empty() && t < events.back().t) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": timestamps not sorted");
    }
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
    events.push_back(Event{static_cast<std::uint16_t>(x),
                           static_cast<std::uint16_t>(y), t,
                           static_cast<std::int8_t>(p)});
  }
  if (!have_header) {
    throw ParseError("missing header '" + std::string(kCsvHeader) + "'",
                     line_no);
  }
  if (!have_dims) dims = Dims{max_y + 1, max_x + 1};
  return EventStream(dims, std::move(events));
}

void WriteCsv(const EventStream& stream, std::ostream& out) {
  out << "# dims " << stream.dims().height << ' ' << stream.dims().width
      << '\n';
  out << kCsvHeader << '\n';
  for (const Event& e : stream.events()) {
    out << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p)
        << '\n';
  }
}

EventStream ReadBinary(std::istream& in) {
  internal::ExpectMagic(in, kEventMagic);
  Dims dims;
  dims.height = internal::ReadLe<std::uint16_t>(in, "height");
  dims.width = internal::ReadLe<std::uint16_t>(in, "width");
  const auto count = internal::ReadLe<std::uint64_t>(in, "count");
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::int64_t offset = static_cast<std::int64_t>(in.tellg());
    Event e;
    e.t = static_cast<TimeUs>(internal::ReadLe<std::uint64_t>(in, "t_us"));
    e.x = internal::ReadLe<std::uint16_t>(in, "x");
    e.y = internal::ReadLe<std::uint16_t>(in, "y");
    e.p = internal::ReadLe<std::int8_t>(in, "p");
    internal::ReadLe<std::uint8_t>(in, "pad");
    if (e.p != 1 && e.p != -1) {
      throw ParseError("record " + std::to_string(i) + " at byte " +
                           std::to_string(offset) + ": polarity " +
                           std::to_string(e.p) + " not in {-1, 1}",
                       offset);
    }
    events.push_back(e);
  }
  return EventStream(dims, std::move(events));
}

void WriteBinary(const EventStream& stream, std::ostream& out) {
  out.write(kEventMagic.data(), kEventMagic.size());
  internal::WriteLe<std::uint16_t>(out, stream.dims().height);
  internal::WriteLe<std::uint16_t>(out, stream.dims().width);
  internal::WriteLe<std::uint64_t>(out, stream.size());
  for (const Event& e : stream.events()) {
    internal::WriteLe<std::uint64_t>(out, static_cast<std::uint64_t>(e.t));
    internal::WriteLe<std::uint16_t>(out, e.x);
    internal::WriteLe<std::uint16_t>(out, e.y);
    internal::WriteLe<std::int8_t>(out, e.p);
    internal::WriteLe<std::uint8_t>(out, 0);
  }
}

}  // namespace

void WriteEvents(const EventStream& stream, std::ostream& out,
                 EventFormat format) {
  if (format == EventFormat::kCsv) {
    WriteCsv(stream, out);
  } else {
    WriteBinary(stream, out);
  }
}

EventStream ReadEvents(std::istream& in, EventFormat format) {
  return format == EventFormat::kCsv ? ReadCsv(in) : ReadBinary(in);
}

void WriteEvents(const EventStream& stream, const std::filesystem::path& path,
                 EventFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  WriteEvents(stream, out, format);
}

EventStream ReadEvents(const std::filesystem::path& path, EventFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  return ReadEvents(in, format);
}

void WriteVoxelGrid(const VoxelGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  out.write("VOX1", 4);
  internal::WriteLe<std::uint16_t>(out, grid.bins());
  internal::WriteLe<std::uint16_t>(out, grid.dims().height);
  internal::WriteLe<std::uint16_t>(out, grid.dims().width);
  internal::WriteLe<std::int64_t>(out, grid.t0());
  internal::WriteLe<std::int64_t>(out, grid.t1());
  for (double v : grid.values()) {
    internal::WriteLe<float>(out, static_cast<float>(v));
  }
}

VoxelGrid ReadVoxelGrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  internal::ExpectMagic(in, "VOX1");
  const int bins = internal::ReadLe<std::uint16_t>(in, "bins");
  Dims dims;
  dims.height = internal::ReadLe<std::uint16_t>(in, "height");
  dims.width = internal::ReadLe<std::uint16_t>(in, "width");
  const auto t0 = internal::ReadLe<std::int64_t>(in, "t0");
  const auto t1 = internal::ReadLe<std::int64_t>(in, "t1");
  VoxelGrid grid(bins, dims, t0, t1);
  for (double& v : grid.values()) v = internal::ReadLe<float>(in, "cell");
  return grid;
}

}  // namespace anyprop
