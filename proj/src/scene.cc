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

#include "anyprop/scene.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <sstream>

#include "anyprop/parallel.h"
#include "anyprop/status.h"

namespace anyprop {
namespace {

constexpr double kMicrosPerSecond = 1e6;

// Velocity times elapsed microseconds, ordered so whole-pixel displacements
// come out exact.
double Displacement(double velocity, TimeUs elapsed_us) {
  return (velocity * static_cast<double>(elapsed_us)) / kMicrosPerSecond;
}

std::vector<std::size_t> PaintOrder(const SceneConfig& config) {
  std::vector<std::size_t> order(config.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return config.objects[a].z_order <
                            config.objects[b].z_order;
                   });
  return order;
}

// Pixel-center bounding box of an object at time t, clipped to the frame.
struct PixelBox {
  int x0, y0, x1, y1;  // inclusive-exclusive
};

PixelBox BoundsAt(const SceneObject& obj, TimeUs t, const Dims& dims) {
  const Vec2 p = obj.PositionAt(t);
  double lx, ly, hx, hy;
  if (obj.shape == ShapeKind::kRect) {
    lx = p.x;
    ly = p.y;
    hx = p.x + obj.width;
    hy = p.y + obj.height;
  } else {
    lx = p.x - obj.radius;
    ly = p.y - obj.radius;
    hx = p.x + obj.radius + 1.0;
    hy = p.y + obj.radius + 1.0;
  }
  PixelBox box;
  box.x0 = std::clamp(static_cast<int>(std::floor(lx)), 0, dims.width);
  box.y0 = std::clamp(static_cast<int>(std::floor(ly)), 0, dims.height);
  box.x1 = std::clamp(static_cast<int>(std::ceil(hx)) + 1, 0, dims.width);
  box.y1 = std::clamp(static_cast<int>(std::ceil(hy)) + 1, 0, dims.height);
  return box;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Vec2 SceneObject::PositionAt(TimeUs t) const {
  return Vec2{position.x + Displacement(velocity.x, t),
              position.y + Displacement(velocity.y, t)};
}

bool SceneObject::Covers(double px, double py, TimeUs t) const {
  const Vec2 p = PositionAt(t);
  if (shape == ShapeKind::kRect) {
    return px >= p.x && px < p.x + width && py >= p.y && py < p.y + height;
  }
  const double dx = px - p.x;
  const double dy = py - p.y;
  return dx * dx + dy * dy <= radius * radius;
}

void SceneConfig::Validate() const {
  if (dims.height <= 0 || dims.width <= 0 || dims.height > 0xFFFF ||
      dims.width > 0xFFFF) {
    throw InvalidArgumentError("scene: bad dims " + ToString(dims));
  }
  if (num_classes < 2) {
    throw InvalidArgumentError("scene: num_classes must be >= 2");
  }
  if (!(background > 0.0 && background <= 1.0)) {
    throw InvalidArgumentError("scene: background intensity must be in (0, 1]");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& o = objects[i];
    const std::string tag = "scene object " + std::to_string(i) + ": ";
    if (o.class_id < 1 || o.class_id >= num_classes) {
      throw InvalidArgumentError(tag + "class id " + std::to_string(o.class_id) +
                                 " outside [1, " + std::to_string(num_classes) +
                                 ")");
    }
    if (!(o.intensity > 0.0 && o.intensity <= 1.0)) {
      throw InvalidArgumentError(tag + "intensity must be in (0, 1]");
    }
    if (o.shape == ShapeKind::kRect && !(o.width > 0.0 && o.height > 0.0)) {
      throw InvalidArgumentError(tag + "rect size must be positive");
    }
    if (o.shape == ShapeKind::kDisk && !(o.radius > 0.0)) {
      throw InvalidArgumentError(tag + "disk radius must be positive");
    }
  }
}

SceneConfig ParseSceneConfig(std::istream& in) {
  SceneConfig config;
  config.objects.clear();
  std::string raw;
  std::int64_t line_no = 0;
  SceneObject* current = nullptr;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("scene line " + std::to_string(line_no) + ": " + msg,
                     line_no);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == "[object]") {
      config.objects.emplace_back();
      current = &config.objects.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    std::istringstream value(Trim(line.substr(eq + 1)));
    auto read = [&](auto&... out) {
      if (!((value >> out) && ...)) fail("bad value for '" + key + "'");
      std::string extra;
      if (value >> extra) fail("trailing tokens for '" + key + "'");
    };
    if (current == nullptr) {
      if (key == "dims") {
        read(config.dims.height, config.dims.width);
      } else if (key == "background") {
        read(config.background);
      } else if (key == "seed") {
        read(config.seed);
      } else if (key == "num_classes") {
        read(config.num_classes);
      } else {
        fail("unknown scene key '" + key + "'");
      }
      continue;
    }
    if (key == "shape") {
      std::string kind;
      value >> kind;
      if (kind == "rect") {
        current->shape = ShapeKind::kRect;
        read(current->width, current->height);
      } else if (kind == "disk") {
        current->shape = ShapeKind::kDisk;
        read(current->radius);
      } else {
        fail("unknown shape '" + kind + "'");
      }
    } else if (key == "class") {
      read(current->class_id);
    } else if (key == "intensity") {
      read(current->intensity);
    } else if (key == "pos") {
      read(current->position.x, current->position.y);
    } else if (key == "vel") {
      read(current->velocity.x, current->velocity.y);
    } else if (key == "z") {
      read(current->z_order);
    } else {
      fail("unknown object key '" + key + "'");
    }
  }
  config.Validate();
  return config;
}

SceneConfig LoadSceneConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open scene " + path.string());
  return ParseSceneConfig(in);
}

std::string FormatSceneConfig(const SceneConfig& config) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "dims = " << config.dims.height << ' ' << config.dims.width << '\n';
  out << "background = " << config.background << '\n';
  out << "seed = " << config.seed << '\n';
  out << "num_classes = " << config.num_classes << '\n';
  for (const SceneObject& o : config.objects) {
    out << "\n[object]\n";
    if (o.shape == ShapeKind::kRect) {
      out << "shape = rect " << o.width << ' ' << o.height << '\n';
    } else {
      out << "shape = disk " << o.radius << '\n';
    }
    out << "class = " << o.class_id << '\n';
    out << "intensity = " << o.intensity << '\n';
    out << "pos = " << o.position.x << ' ' << o.position.y << '\n';
    out << "vel = " << o.velocity.x << ' ' << o.velocity.y << '\n';
    out << "z = " << o.z_order << '\n';
  }
  return out.str();
}

RenderedFrame RenderScene(const SceneConfig& config, TimeUs t) {
  if (t < 0) throw InvalidArgumentError("RenderScene: negative time");
  config.Validate();
  RenderedFrame out;
  out.frame.values = Plane<double>(config.dims, config.background);
  out.frame.timestamp = t;
  out.labels.labels = Plane<int>(config.dims, 0);
  out.labels.timestamp = t;
  out.labels.num_classes = config.num_classes;
  for (std::size_t idx : PaintOrder(config)) {
    const SceneObject& obj = config.objects[idx];
    const PixelBox box = BoundsAt(obj, t, config.dims);
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x = box.x0; x < box.x1; ++x) {
        if (!obj.Covers(x, y, t)) continue;
        out.frame.values.at(y, x) = obj.intensity;
        out.labels.labels.at(y, x) = obj.class_id;
      }
    }
  }
  return out;
}

FlowField OracleFlow(const SceneConfig& config, TimeUs t_a, TimeUs t_b) {
  if (t_b < t_a) throw InvalidArgumentError("OracleFlow: t_b < t_a");
  config.Validate();
  FlowField flow(config.dims);
  const TimeUs elapsed = t_b - t_a;
  for (std::size_t idx : PaintOrder(config)) {
    const SceneObject& obj = config.objects[idx];
    const double du = Displacement(obj.velocity.x, elapsed);
    const double dv = Displacement(obj.velocity.y, elapsed);
    const PixelBox box = BoundsAt(obj, t_a, config.dims);
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x = box.x0; x < box.x1; ++x) {
        if (!obj.Covers(x, y, t_a)) continue;
        flow.u.at(y, x) = du;
        flow.v.at(y, x) = dv;
      }
    }
  }
  return flow;
}

ConfidenceMap OracleConfidence(const SceneConfig& config, TimeUs t_a,
                               double s_min, double s_max) {
  if (!(s_min <= s_max)) {
    throw InvalidArgumentError("OracleConfidence: s_min > s_max");
  }
  config.Validate();
  ConfidenceMap conf(config.dims, s_min);
  const std::vector<std::size_t> order = PaintOrder(config);
  const double step = (s_max - s_min) / std::max<std::size_t>(order.size(), 1);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const SceneObject& obj = config.objects[order[rank]];
    const double level = s_min + step * static_cast<double>(rank + 1);
    const PixelBox box = BoundsAt(obj, t_a, config.dims);
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x = box.x0; x < box.x1; ++x) {
        if (obj.Covers(x, y, t_a)) conf.s.at(y, x) = level;
      }
    }
  }
  return conf;
}

EventStream SimulateEvents(const LogIntensitySource& log_intensity, Dims dims,
                           TimeUs t0, TimeUs t1, double contrast, TimeUs dt_sim,
                           Plane<double>* final_reference) {
  if (!(contrast > 0.0)) {
    throw InvalidArgumentError("SimulateEvents: contrast must be positive");
  }
  if (t1 <= t0) throw InvalidArgumentError("SimulateEvents: t1 <= t0");
  if (dt_sim < 1) throw InvalidArgumentError("SimulateEvents: dt_sim < 1 us");

  Plane<double> reference = log_intensity(t0);
  if (!(reference.dims() == dims)) {
    throw InvalidArgumentError("SimulateEvents: source dims mismatch");
  }
  std::vector<Event> events;
  std::vector<std::vector<Event>> row_events(dims.height);
  TimeUs t = t0;
  while (t < t1) {
    t = std::min(t + dt_sim, t1);
    const Plane<double> level = log_intensity(t);
    ParallelFor(dims.height, [&](int row_begin, int row_end) {
      for (int y = row_begin; y < row_end; ++y) {
        auto& bucket = row_events[y];
        bucket.clear();
        for (int x = 0; x < dims.width; ++x) {
          double& ref = reference.at(y, x);
          const double l = level.at(y, x);
          while (std::abs(l - ref) >= contrast) {
            const std::int8_t pol = l > ref ? 1 : -1;
            ref += contrast * pol;
            bucket.push_back(Event{static_cast<std::uint16_t>(x),
                                   static_cast<std::uint16_t>(y), t, pol});
          }
        }
      }
    });
    for (const auto& bucket : row_events) {
      events.insert(events.end(), bucket.begin(), bucket.end());
    }
  }
  if (final_reference != nullptr) *final_reference = std::move(reference);
  return EventStream(dims, std::move(events), TimeSpan{t0, t1});
}

EventStream SimulateEvents(const SceneConfig& config, TimeUs t0, TimeUs t1,
                           double contrast, TimeUs dt_sim,
                           Plane<double>* final_reference) {
  config.Validate();
  auto source = [&config](TimeUs t) {
    Plane<double> level = RenderScene(config, t).frame.values;
    for (double& v : level.values()) v = std::log(v);
    return level;
  };
  return SimulateEvents(source, config.dims, t0, t1, contrast, dt_sim,
                        final_reference);
}

}  // namespace anyprop
