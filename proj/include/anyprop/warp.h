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

#ifndef ANYPROP_WARP_H_
#define ANYPROP_WARP_H_

#include <filesystem>

#include "anyprop/tensor.h"

namespace anyprop {

// Denominators at or below this mark a pixel as uncovered. Covered pixels
// always use the raw numerator / denominator.
inline constexpr double kCoverageEpsilon = 1e-12;

struct SplatSums {
  FeatureMap numerator;
  Plane<double> denominator;
};

// Forward (summation) splatting: every source pixel q scatters
// weight(q) * payload(q) and weight(q) to the four integer neighbors of
// q + flow(q) with bilinear kernel weights. Targets outside the frame are
// dropped. Accumulation follows row-major source order at every target, also
// on the threaded path.
SplatSums SplatSum(const FeatureMap& payload, const FlowField& flow,
                   const Plane<double>& weight);

// What an uncovered pixel receives after softmax splatting.
enum class HolePolicy {
  kCopySource,  // the unwarped payload at that pixel
  kUniform,     // 1/C per channel for class-prob payloads, else kCopySource
};

struct SplatResult {
  FeatureMap numerator;
  Plane<double> denominator;
  FeatureMap output;
  Mask coverage;
};

// Softmax splatting with `confidence` as the log-space importance weight:
// output = splat(exp(S') * F) / splat(exp(S')), S' = S - max(S).
SplatResult SoftmaxSplat(const FeatureMap& payload, const FlowField& flow,
                         const ConfidenceMap& confidence,
                         HolePolicy holes = HolePolicy::kCopySource);

struct SplatGradients {
  FeatureMap d_payload;
  Plane<double> d_confidence;
  FlowField d_flow;
};

// Gradient of sum(upstream * SoftmaxSplat(...).output) with respect to the
// payload, confidence and flow. The bilinear kernel is differentiated from
// the right at integer landing positions.
SplatGradients SoftmaxSplatGradients(const FeatureMap& payload,
                                     const FlowField& flow,
                                     const ConfidenceMap& confidence,
                                     const FeatureMap& upstream,
                                     HolePolicy holes = HolePolicy::kCopySource);

// output(q) = payload bilinearly sampled at q + flow(q), border-clamped.
FeatureMap BackwardWarp(const FeatureMap& payload, const FlowField& flow);

inline constexpr int kDefaultRefinePasses = 2;

// Fixed 3x3 smoothing standing in for a learned refinement head. Each pass
// replaces a pixel with the mean of the covered pixels in its 3x3
// neighborhood (pixels with none are left alone). On class-prob maps a covered
// pixel only averages neighbors that decode to its own label, so refinement
// never moves a label boundary; uncovered pixels take the plain covered mean.
// Class-prob maps are renormalized per pixel. A null coverage means all
// pixels are covered.
FeatureMap Refine(const FeatureMap& feature, int passes = kDefaultRefinePasses,
                  const Mask* coverage = nullptr);

enum class WarpDomain { kImage, kSegmentation, kFeature };

const char* ToString(WarpDomain domain);

struct DomainWarpResult {
  FeatureMap payload;
  Mask coverage;
};

// Splats a payload in one of three domains:
//   kImage         1 x H x W intensity, splatted as is (caller re-labels);
//   kSegmentation  one-hot C x H x W, splatted then argmax re-encoded one-hot;
//   kFeature       generic C x H x W, splatted as is.
DomainWarpResult WarpInDomain(WarpDomain domain, const FeatureMap& payload,
                              const FlowField& flow,
                              const ConfidenceMap& confidence);

// FTR1: u16 C, u16 H, u16 W, then C*H*W f32 (channel-major, row-major).
void WriteFeatureMap(const FeatureMap& feature,
                     const std::filesystem::path& path);
FeatureMap ReadFeatureMap(const std::filesystem::path& path);

}  // namespace anyprop

#endif  // ANYPROP_WARP_H_
