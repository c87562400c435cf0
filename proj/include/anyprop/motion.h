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

#ifndef ANYPROP_MOTION_H_
#define ANYPROP_MOTION_H_

#include <filesystem>
#include <utility>
#include <vector>

#include "anyprop/events.h"
#include "anyprop/tensor.h"

namespace anyprop {

// Score assigned to offsets whose target pixel falls outside the frame. Kept
// finite so bilinear lookups never produce NaN.
inline constexpr double kOutOfBoundsScore = -1e30;

// scores(y, x, dy, dx) for dy, dx in [-radius, radius], offset (0, 0) at the
// center of each (2r+1)^2 block.
class CorrelationVolume {
 public:
  CorrelationVolume() = default;
  CorrelationVolume(Dims dims, int radius);

  const Dims& dims() const { return dims_; }
  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }

  double& at(int y, int x, int dy, int dx) { return scores_[index(y, x, dy, dx)]; }
  double at(int y, int x, int dy, int dx) const {
    return scores_[index(y, x, dy, dx)];
  }

  // Best offset at a pixel; exact ties go to the offset closest to (0, 0),
  // then to the smallest (dy, dx) in row-major order.
  std::pair<int, int> Argmax(int y, int x) const;  // (dy, dx)

 private:
  std::size_t index(int y, int x, int dy, int dx) const {
    const std::size_t cell =
        static_cast<std::size_t>(y) * dims_.width + static_cast<std::size_t>(x);
    return (cell * side() + static_cast<std::size_t>(dy + radius_)) * side() +
           static_cast<std::size_t>(dx + radius_);
  }

  Dims dims_;
  int radius_ = 0;
  std::vector<double> scores_;
};

// Normalized cross-correlation between the patch x patch, bin-stacked
// neighborhoods of `a` at (x, y) and of `b` at (x + dx, y + dy). Pixels
// outside the frame read as zero; a zero-energy patch scores 0.
CorrelationVolume BuildCorrelation(const VoxelGrid& a, const VoxelGrid& b,
                                   int radius, int patch);

struct FlowParams {
  int radius = 4;
  int patch = 5;
  int iterations = 8;
  int smooth_passes = 1;
  // Component-wise cap; the effective bound is min(this, radius * iterations).
  double max_displacement = 1e9;
};

// Iterative correlation-lookup estimator. Starts from zero flow; every
// iteration moves each event-active pixel of `a` to the best-scoring integer
// offset within `radius` of its current estimate, then smooths over active
// neighbors. Inactive pixels are filled from the nearest active ones at the
// end.
FlowField EstimateFlow(const VoxelGrid& a, const VoxelGrid& b,
                       const FlowParams& params = {});

struct ConfidenceParams {
  int density_radius = 2;
  double alpha = 4.0;
  double beta = 2.0;
  double s_min = -6.0;
  double s_max = 6.0;
};

// s = clamp(alpha * density + beta * consistency, s_min, s_max), with density
// the local event energy scaled by its frame maximum and consistency one minus
// the scaled local flow total variation. Pixels with no events in their
// neighborhood get s_min.
ConfidenceMap ConsensusConfidence(const VoxelGrid& voxel, const FlowField& flow,
                                  const ConfidenceParams& params = {});

// FLW1: u16 H, u16 W, H*W (u, v) f32 pairs. CNF1: u16 H, u16 W, H*W f32.
void WriteFlow(const FlowField& flow, const std::filesystem::path& path);
FlowField ReadFlow(const std::filesystem::path& path);
void WriteConfidence(const ConfidenceMap& conf,
                     const std::filesystem::path& path);
ConfidenceMap ReadConfidence(const std::filesystem::path& path);

}  // namespace anyprop

#endif  // ANYPROP_MOTION_H_
