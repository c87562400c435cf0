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

#ifndef ANYPROP_SCENE_H_
#define ANYPROP_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "anyprop/events.h"
#include "anyprop/tensor.h"

namespace anyprop {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

enum class ShapeKind { kRect, kDisk };

// Rects are anchored at their top-left corner and cover pixel centers with
// pos.x <= x < pos.x + width (likewise rows). Disks are anchored at their
// center and cover pixel centers with |c - pos| <= radius.
struct SceneObject {
  ShapeKind shape = ShapeKind::kRect;
  double width = 1.0;
  double height = 1.0;
  double radius = 1.0;
  int class_id = 1;
  double intensity = 1.0;
  Vec2 position;  // at t = 0
  Vec2 velocity;  // px/s
  int z_order = 0;

  Vec2 PositionAt(TimeUs t) const;
  bool Covers(double px, double py, TimeUs t) const;
};

struct SceneConfig {
  Dims dims{32, 32};
  double background = 0.5;
  std::vector<SceneObject> objects;
  int num_classes = 11;
  std::uint64_t seed = 0;

  // Throws InvalidArgumentError on bad intensities, dims or class ids.
  void Validate() const;
};

// Line-oriented key=value text with [object] sections; '#' starts a comment.
//   dims = H W
//   background = 0.2
//   seed = 7
//   num_classes = 11
//   [object]
//   shape = rect W H        (or: shape = disk R)
//   class = 1
//   intensity = 0.8
//   pos = X Y
//   vel = VX VY
//   z = 1
SceneConfig ParseSceneConfig(std::istream& in);
SceneConfig LoadSceneConfig(const std::filesystem::path& path);
std::string FormatSceneConfig(const SceneConfig& config);

struct IntensityFrame {
  Plane<double> values;
  TimeUs timestamp = 0;
};

struct LabelMap {
  Plane<int> labels;
  TimeUs timestamp = 0;
  int num_classes = 0;

  const Dims& dims() const { return labels.dims(); }
  bool operator==(const LabelMap&) const = default;
};

struct RenderedFrame {
  IntensityFrame frame;
  LabelMap labels;
};

// Hard-rasterized scene at time t; among objects covering a pixel center the
// highest z_order wins (later declaration on equal z).
RenderedFrame RenderScene(const SceneConfig& config, TimeUs t);

// Exact displacement from t_a to t_b of whatever object owns each pixel at t_a;
// background pixels get zero.
FlowField OracleFlow(const SceneConfig& config, TimeUs t_a, TimeUs t_b);

// Depth-ordered log-precision at t_a: background gets s_min, objects rise
// evenly to s_max in paint order, so front surfaces win forward-warp
// collisions. Pairs with OracleFlow when injecting ground-truth motion.
ConfidenceMap OracleConfidence(const SceneConfig& config, TimeUs t_a,
                               double s_min = -6.0, double s_max = 6.0);

inline constexpr double kDefaultContrast = 0.3;
inline constexpr TimeUs kDefaultSimStepUs = 1000;

// Log-intensity image at a given time, used by the generic simulator.
using LogIntensitySource = std::function<Plane<double>(TimeUs)>;

// Per-pixel threshold-crossing sensor model. The reference level starts at
// L(t0) and advances by C * polarity for each emitted event; several events
// may fire at one step. Steps are t0 + k*dt_sim, with a final step at t1 if
// the grid does not land on it. Output is ordered by (t, y, x, emission).
EventStream SimulateEvents(const LogIntensitySource& log_intensity, Dims dims,
                           TimeUs t0, TimeUs t1,
                           double contrast = kDefaultContrast,
                           TimeUs dt_sim = kDefaultSimStepUs,
                           Plane<double>* final_reference = nullptr);

EventStream SimulateEvents(const SceneConfig& config, TimeUs t0, TimeUs t1,
                           double contrast = kDefaultContrast,
                           TimeUs dt_sim = kDefaultSimStepUs,
                           Plane<double>* final_reference = nullptr);

}  // namespace anyprop

#endif  // ANYPROP_SCENE_H_
