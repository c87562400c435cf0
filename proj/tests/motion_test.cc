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

#include "anyprop/motion.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include "anyprop/status.h"
#include "oracles.h"

namespace anyprop {
namespace {

constexpr Dims kDims{24, 28};

// Endpoint errors at event-active pixels at least `margin` from the border.
std::vector<double> InteriorErrors(const VoxelGrid& a, const FlowField& flow,
                                   int dx, int dy, int margin) {
  const Plane<double> energy = a.AbsEnergy();
  std::vector<double> errors;
  for (int y = margin; y < a.dims().height - margin; ++y) {
    for (int x = margin; x < a.dims().width - margin; ++x) {
      if (energy.at(y, x) == 0.0) continue;
      errors.push_back(std::hypot(flow.u.at(y, x) - dx, flow.v.at(y, x) - dy));
    }
  }
  return errors;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(CorrelationTest, SelfCorrelationPeaksAtZero) {
  std::mt19937_64 rng(31);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 0, 0, 0.3);
  const CorrelationVolume volume = BuildCorrelation(pair.a, pair.a, 3, 5);
  EXPECT_EQ(volume.side(), 7);
  int checked = 0;
  for (int y = 0; y < kDims.height; ++y) {
    for (int x = 0; x < kDims.width; ++x) {
      if (volume.at(y, x, 0, 0) == 0.0) continue;
      EXPECT_EQ(volume.Argmax(y, x), (std::pair<int, int>{0, 0}));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(CorrelationTest, RecoversConstructedShift) {
  std::mt19937_64 rng(32);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 2, 0, 0.3);
  const CorrelationVolume volume = BuildCorrelation(pair.a, pair.b, 4, 5);
  for (int y = 6; y < kDims.height - 6; ++y) {
    for (int x = 6; x < kDims.width - 8; ++x) {
      // Exhaustive scan of the stored scores agrees with Argmax.
      double best = volume.at(y, x, 0, 0);
      for (int dy = -4; dy <= 4; ++dy) {
        for (int dx = -4; dx <= 4; ++dx) best = std::max(best, volume.at(y, x, dy, dx));
      }
      EXPECT_EQ(volume.Argmax(y, x), (std::pair<int, int>{0, 2})) << y << " " << x;
      EXPECT_EQ(volume.at(y, x, 0, 2), best);
      EXPECT_NEAR(best, 1.0, 1e-12);
    }
  }
}

TEST(CorrelationTest, ZeroEnergyScoresZeroAndBorderUsesSentinel) {
  const VoxelGrid empty(4, Dims{6, 6}, 0, 1);
  const CorrelationVolume volume = BuildCorrelation(empty, empty, 2, 3);
  EXPECT_EQ(volume.at(3, 3, 1, -1), 0.0);
  EXPECT_EQ(volume.at(0, 0, -1, 0), kOutOfBoundsScore);
  EXPECT_EQ(volume.at(5, 5, 0, 2), kOutOfBoundsScore);
  EXPECT_TRUE(std::isfinite(volume.at(0, 0, -2, -2)));
}

TEST(CorrelationTest, RejectsBadArguments) {
  const VoxelGrid a(4, Dims{6, 6}, 0, 1);
  const VoxelGrid b(4, Dims{6, 7}, 0, 1);
  const VoxelGrid c(3, Dims{6, 6}, 0, 1);
  EXPECT_THROW(BuildCorrelation(a, b, 2, 3), InvalidArgumentError);
  EXPECT_THROW(BuildCorrelation(a, c, 2, 3), InvalidArgumentError);
  EXPECT_THROW(BuildCorrelation(a, a, 0, 3), InvalidArgumentError);
  EXPECT_THROW(BuildCorrelation(a, a, 2, 4), InvalidArgumentError);
  EXPECT_THROW(EstimateFlow(a, a, FlowParams{.iterations = 0}),
               InvalidArgumentError);
}

TEST(EstimateFlowTest, IdenticalVoxelsGiveZeroFlow) {
  std::mt19937_64 rng(33);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 0, 0, 0.2);
  const FlowField flow = EstimateFlow(pair.a, pair.a);
  const std::vector<double> errors = InteriorErrors(pair.a, flow, 0, 0, 0);
  for (double e : errors) EXPECT_EQ(e, 0.0);
}

TEST(EstimateFlowTest, EmptyVoxelsGiveZeroFlow) {
  const VoxelGrid empty(4, kDims, 0, 1);
  const FlowField flow = EstimateFlow(empty, empty);
  for (double u : flow.u.values()) EXPECT_EQ(u, 0.0);
  for (double v : flow.v.values()) EXPECT_EQ(v, 0.0);
}

TEST(EstimateFlowTest, RecoversIntegerTranslations) {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> shift(-4, 4);
  for (int trial = 0; trial < 12; ++trial) {
    const int dx = shift(rng);
    const int dy = shift(rng);
    const testing::ShiftedPair pair =
        testing::RandomShiftedVoxels(rng, kDims, 4, dx, dy, 0.25);
    const FlowField flow = EstimateFlow(pair.a, pair.b);
    const std::vector<double> errors = InteriorErrors(pair.a, flow, dx, dy, 7);
    ASSERT_FALSE(errors.empty());
    EXPECT_LE(Median(errors), 0.5) << dx << "," << dy;
  }
}

TEST(EstimateFlowTest, SmoothTextureIsFollowedBeyondOneRadius) {
  // A wide blob gives the correlation surface a basin that the iterations
  // can climb one radius at a time.
  const Dims dims{32, 48};
  VoxelGrid a(4, dims, 0, 1);
  VoxelGrid b(4, dims, 1, 2);
  auto blob = [](double x, double y) {
    return std::exp(-((x - 18.0) * (x - 18.0) + (y - 16.0) * (y - 16.0)) / 32.0);
  };
  for (int bin = 0; bin < 4; ++bin) {
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        a.at(bin, y, x) = blob(x, y);
        b.at(bin, y, x) = blob(x - 7, y);
      }
    }
  }
  const FlowField flow =
      EstimateFlow(a, b, FlowParams{.radius = 3, .patch = 7, .iterations = 8});
  EXPECT_NEAR(flow.u.at(16, 18), 7.0, 0.5);
  EXPECT_NEAR(flow.v.at(16, 18), 0.0, 0.5);
}

TEST(EstimateFlowTest, StaysWithinReach) {
  std::mt19937_64 rng(36);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 3, -3, 0.25);
  const FlowParams params{.radius = 1, .iterations = 2};
  const FlowField flow = EstimateFlow(pair.a, pair.b, params);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    EXPECT_LE(std::abs(flow.u[i]), 2.0);
    EXPECT_LE(std::abs(flow.v[i]), 2.0);
  }
}

TEST(EstimateFlowTest, IsDeterministic) {
  std::mt19937_64 rng(37);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 1, 2, 0.1);
  EXPECT_EQ(EstimateFlow(pair.a, pair.b), EstimateFlow(pair.a, pair.b));
}

TEST(ConfidenceTest, NoEventsGiveMinimum) {
  const VoxelGrid empty(4, kDims, 0, 1);
  const ConfidenceMap s = ConsensusConfidence(empty, FlowField(kDims));
  for (double v : s.s.values()) EXPECT_EQ(v, -6.0);
}

TEST(ConfidenceTest, DenseUniformEventsAndConstantFlowSaturate) {
  VoxelGrid voxel(4, kDims, 0, 1);
  for (double& v : voxel.values()) v = 1.0;
  FlowField flow(kDims);
  for (double& u : flow.u.values()) u = 1.5;
  const ConfidenceParams params{.alpha = 4.0, .beta = 2.0, .s_max = 6.0};
  const ConfidenceMap s = ConsensusConfidence(voxel, flow, params);
  // Interior pixels have full density and zero variation: 4 + 2 = 6.
  for (int y = 2; y < kDims.height - 2; ++y) {
    for (int x = 2; x < kDims.width - 2; ++x) EXPECT_EQ(s.s.at(y, x), 6.0);
  }
}

TEST(ConfidenceTest, FlowDisagreementLowersConfidence) {
  VoxelGrid voxel(4, kDims, 0, 1);
  for (double& v : voxel.values()) v = 1.0;
  FlowField flow(kDims);
  std::mt19937_64 rng(38);
  std::uniform_real_distribution<double> noise(-3.0, 3.0);
  for (int y = 0; y < kDims.height; ++y) {
    for (int x = kDims.width / 2; x < kDims.width; ++x) {
      flow.u.at(y, x) = noise(rng);
      flow.v.at(y, x) = noise(rng);
    }
  }
  const ConfidenceMap s = ConsensusConfidence(voxel, flow);
  EXPECT_GT(s.s.at(12, 5), s.s.at(12, 22));
}

TEST(ConfidenceTest, AddingEventsNeverLowersConfidence) {
  std::mt19937_64 rng(39);
  const FlowField flow = testing::RandomFlow(rng, kDims, 2.0);
  VoxelGrid base(4, kDims, 0, 1);
  // A dense block holds the frame maximum; the sparse region stays below it.
  for (int y = 2; y < 10; ++y) {
    for (int x = 2; x < 10; ++x) base.at(0, y, x) = 3.0;
  }
  std::bernoulli_distribution sparse(0.2);
  for (int y = 12; y < 22; ++y) {
    for (int x = 12; x < 26; ++x) {
      if (sparse(rng)) base.at(1, y, x) = 1.0;
    }
  }
  VoxelGrid more = base;
  for (int y = 14; y < 20; ++y) {
    for (int x = 14; x < 24; ++x) more.at(2, y, x) += 0.5;
  }
  const ConfidenceMap before = ConsensusConfidence(base, flow);
  const ConfidenceMap after = ConsensusConfidence(more, flow);
  for (int y = 12; y < 22; ++y) {
    for (int x = 12; x < 26; ++x) {
      EXPECT_GE(after.s.at(y, x), before.s.at(y, x)) << y << " " << x;
    }
  }
}

TEST(ConfidenceTest, StaysInsideClamp) {
  std::mt19937_64 rng(40);
  const testing::ShiftedPair pair =
      testing::RandomShiftedVoxels(rng, kDims, 4, 0, 0, 0.3);
  const ConfidenceParams params{.alpha = 40.0, .beta = -30.0, .s_min = -2.0,
                                .s_max = 3.0};
  const ConfidenceMap s =
      ConsensusConfidence(pair.a, testing::RandomFlow(rng, kDims, 3.0), params);
  for (double v : s.s.values()) {
    EXPECT_GE(v, -2.0);
    EXPECT_LE(v, 3.0);
  }
}

TEST(MotionCodecTest, FlowAndConfidenceRoundTrip) {
  std::mt19937_64 rng(41);
  FlowField flow = testing::RandomFlow(rng, Dims{5, 7}, 3.0);
  ConfidenceMap conf = testing::RandomConfidence(rng, Dims{5, 7}, -6, 6);
  // The files store f32, so start from f32-representable values.
  for (double& v : flow.u.values()) v = static_cast<float>(v);
  for (double& v : flow.v.values()) v = static_cast<float>(v);
  for (double& v : conf.s.values()) v = static_cast<float>(v);
  const auto dir = std::filesystem::temp_directory_path();
  WriteFlow(flow, dir / "anyprop_motion_test.flw");
  WriteConfidence(conf, dir / "anyprop_motion_test.cnf");
  EXPECT_EQ(ReadFlow(dir / "anyprop_motion_test.flw"), flow);
  EXPECT_EQ(ReadConfidence(dir / "anyprop_motion_test.cnf"), conf);
}

}  // namespace
}  // namespace anyprop
