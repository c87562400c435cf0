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

#ifndef ANYPROP_PIPELINE_H_
#define ANYPROP_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "anyprop/events.h"
#include "anyprop/memory.h"
#include "anyprop/motion.h"
#include "anyprop/scene.h"
#include "anyprop/tensor.h"
#include "anyprop/warp.h"

namespace anyprop {

// Mixing weight between the one-hot label encoding and the uniform
// distribution used for keyframe features.
inline constexpr double kDefaultLabelSmoothing = 0.05;

struct KeyframeState {
  IntensityFrame frame;
  FeatureMap feature;  // class-prob, num_classes channels
  LabelMap labels;
  TimeUs t = 0;
  TimeUs interval = 50'000;  // keyframe spacing
};

// Class-prob features (1 - smoothing) * one_hot(label) + smoothing / C.
KeyframeState EncodeKeyframe(const IntensityFrame& frame,
                             const LabelMap& labels, TimeUs interval,
                             double smoothing = kDefaultLabelSmoothing);

// Per-pixel argmax, ties to the smallest class id.
LabelMap DecodeLabels(const FeatureMap& feature);

// Injected motion field or confidence for the step from t_from to t_to.
using FlowProvider = std::function<FlowField(TimeUs t_from, TimeUs t_to)>;
using ConfidenceProvider =
    std::function<ConfidenceMap(TimeUs t_from, TimeUs t_to)>;

struct PipelineOptions {
  int bins = kDefaultBins;
  FlowParams flow;
  ConfidenceParams confidence;
  // Off: every pixel gets the same log-precision (plain softmax splatting).
  bool use_confidence = true;
  int refine_passes = kDefaultRefinePasses;
  bool use_memory = true;
  int memory_capacity = MemoryBank::kDefaultCapacity;
  double memory_temperature = MemoryBank::kDefaultTemperature;
  HolePolicy holes = HolePolicy::kCopySource;

  FlowProvider flow_override;
  ConfidenceProvider confidence_override;
};

// key = value lines; keys: bins, flow_radius, flow_patch, flow_iters,
// flow_smooth, density_radius, alpha, beta, s_min, s_max, confidence (on|off),
// refine_passes, memory (on|off), capacity, tau, holes (source|uniform).
PipelineOptions ParsePipelineOptions(std::istream& in,
                                     PipelineOptions base = {});
PipelineOptions LoadPipelineOptions(const std::filesystem::path& path,
                                    PipelineOptions base = {});
std::string FormatPipelineOptions(const PipelineOptions& options);

struct PredictionState {
  TimeUs dt = 0;
  VoxelGrid voxel_before;  // E over [t - dt, t)
  VoxelGrid voxel_after;   // E over [t, t + dt)
  FlowField flow;
  ConfidenceMap confidence;
  FeatureMap splatted;  // softmax-splat output before refinement
  Mask coverage;
  FeatureMap feature;  // refined and (optionally) memory-enhanced
  LabelMap labels;
};

// Propagates keyframe features to arbitrary offsets inside the keyframe
// interval. Owns the memory bank; one instance per sequence.
class Pipeline {
 public:
  explicit Pipeline(PipelineOptions options = {});

  const PipelineOptions& options() const { return options_; }
  const MemoryBank& memory() const { return memory_; }

  // Stores the keyframe feature in the memory bank (when memory is enabled).
  void AddKeyframe(const KeyframeState& state);

  // Requires 0 < dt <= state.interval and events spanning
  // [t - interval, t + dt]; throws InvalidArgumentError /
  // InsufficientDataError otherwise.
  PredictionState Propagate(const KeyframeState& state,
                            const EventStream& events, TimeUs dt) const;

  // Warps to t + mid, then from there to t + interval with a second motion
  // field estimated from E[t, t+mid) and E[t+mid, t+interval). Returns the
  // twice-warped feature.
  FeatureMap TwoStageAlign(const KeyframeState& state,
                           const EventStream& events, TimeUs mid) const;

  // Motion field and confidence for the step t -> t + dt, before splatting.
  FlowField EstimateMotion(const VoxelGrid& before, const VoxelGrid& after,
                           TimeUs t_from, TimeUs t_to) const;
  ConfidenceMap EstimateConfidence(const VoxelGrid& after,
                                   const FlowField& flow, TimeUs t_from,
                                   TimeUs t_to) const;

 private:
  void CheckCoverage(const EventStream& events, TimeUs begin,
                     TimeUs end) const;

  PipelineOptions options_;
  MemoryBank memory_;
};

}  // namespace anyprop

#endif  // ANYPROP_PIPELINE_H_
