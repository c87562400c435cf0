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

#include "anyprop/bench.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include "anyprop/status.h"
#include "oracles.h"

namespace anyprop {
namespace {

SceneConfig Scene(const std::string& name) {
  return LoadSceneConfig(std::string(ANYPROP_SCENE_DIR) + "/" + name + ".scene");
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  return out;
}

TEST(MiouTest, Examples) {
  const LabelMap gt = testing::MakeLabels({{0, 0}, {1, 1}}, 2);
  EXPECT_EQ(ComputeMiou(gt, gt, 2).miou, 1.0);

  const LabelMap inverted = testing::MakeLabels({{1, 1}, {0, 0}}, 2);
  const IouResult zero = ComputeMiou(inverted, gt, 2);
  EXPECT_EQ(*zero.per_class[0], 0.0);
  EXPECT_EQ(*zero.per_class[1], 0.0);
  EXPECT_EQ(zero.miou, 0.0);

  const LabelMap pred = testing::MakeLabels({{0, 1}, {1, 1}}, 2);
  const IouResult r = ComputeMiou(pred, gt, 2);
  EXPECT_DOUBLE_EQ(*r.per_class[0], 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(*r.per_class[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.miou, 7.0 / 12.0);
  EXPECT_EQ(r.confusion.at(0, 1), 1);
  EXPECT_EQ(r.confusion.total(), 4);
}

TEST(MiouTest, ExcludesClassesWithEmptyUnion) {
  const LabelMap gt = testing::MakeLabels({{0, 2}}, 4);
  const IouResult r = ComputeMiou(gt, gt, 4);
  EXPECT_FALSE(r.per_class[1].has_value());
  EXPECT_FALSE(r.per_class[3].has_value());
  EXPECT_EQ(r.miou, 1.0);
}

TEST(MiouTest, RejectsMismatches) {
  const LabelMap a = testing::MakeLabels({{0, 1}}, 2);
  const LabelMap b = testing::MakeLabels({{0}, {1}}, 2);
  EXPECT_THROW(ComputeMiou(a, b, 2), InvalidArgumentError);
  const LabelMap c = testing::MakeLabels({{0, 5}}, 2);
  EXPECT_THROW(ComputeMiou(c, a, 2), InvalidArgumentError);
}

TEST(MiouTest, MatchesBruteForceCount) {
  std::mt19937_64 rng(81);
  std::uniform_int_distribution<int> side(1, 64);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 2 + trial % 6;
    std::uniform_int_distribution<int> label(0, k - 1);
    const int h = side(rng);
    const int w = side(rng);
    std::vector<std::vector<int>> g(h, std::vector<int>(w));
    std::vector<std::vector<int>> p(h, std::vector<int>(w));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        g[y][x] = label(rng);
        p[y][x] = label(rng) < 1 ? label(rng) : g[y][x];
      }
    }
    const IouResult r =
        ComputeMiou(testing::MakeLabels(p, k), testing::MakeLabels(g, k), k);
    double sum = 0.0;
    int used = 0;
    for (int c = 0; c < k; ++c) {
      long tp = 0;
      long fp = 0;
      long fn = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          tp += g[y][x] == c && p[y][x] == c;
          fp += g[y][x] != c && p[y][x] == c;
          fn += g[y][x] == c && p[y][x] != c;
        }
      }
      if (tp + fp + fn == 0) {
        EXPECT_FALSE(r.per_class[c].has_value());
        continue;
      }
      const double iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      EXPECT_EQ(*r.per_class[c], iou);
      sum += iou;
      ++used;
    }
    EXPECT_DOUBLE_EQ(r.miou, sum / used);
  }
}

TEST(PerturbFlowTest, ZeroSigmaAndSeedDeterminism) {
  std::mt19937_64 rng(82);
  const FlowField flow = testing::RandomFlow(rng, Dims{6, 7}, 2.0);
  EXPECT_EQ(PerturbFlow(flow, 0.0, nullptr, 5), flow);
  EXPECT_EQ(PerturbFlow(flow, 2.0, nullptr, 5), PerturbFlow(flow, 2.0, nullptr, 5));
  EXPECT_NE(PerturbFlow(flow, 2.0, nullptr, 5), PerturbFlow(flow, 2.0, nullptr, 6));
  EXPECT_THROW(PerturbFlow(flow, -1.0, nullptr, 5), InvalidArgumentError);
}

TEST(PerturbFlowTest, OnlyTouchesTheRegion) {
  std::mt19937_64 rng(83);
  const Dims dims{6, 7};
  const FlowField flow = testing::RandomFlow(rng, dims, 2.0);
  Mask region(dims, 0);
  for (int x = 0; x < 7; ++x) region.at(2, x) = 1;
  const FlowField full = PerturbFlow(flow, 1.5, nullptr, 9);
  const FlowField masked = PerturbFlow(flow, 1.5, &region, 9);
  for (std::size_t i = 0; i < dims.area(); ++i) {
    if (region[i]) {
      EXPECT_EQ(masked.u[i], full.u[i]);
      EXPECT_NE(masked.u[i], flow.u[i]);
    } else {
      EXPECT_EQ(masked.u[i], flow.u[i]);
      EXPECT_EQ(masked.v[i], flow.v[i]);
    }
  }
}

TEST(AnytimeCurveTest, StaticSceneIsFlatAtOne) {
  const BenchReport report =
      AnytimeCurve(Scene("static"), AllAnytimeMethods(),
                   DefaultAnytimeSettings().dts, 1);
  EXPECT_EQ(report.rows.size(), 40u);
  for (const BenchRow& row : report.rows) {
    EXPECT_EQ(row.iou.miou, 1.0) << row.variant << " " << row.dt;
  }
}

TEST(AnytimeCurveTest, BaselineDecaysOnMovingScene) {
  const BenchReport report =
      AnytimeCurve(Scene("constant_velocity"), {AnytimeMethod::kLfrBaseline},
                   DefaultAnytimeSettings().dts, 1);
  const std::vector<BenchRow> curve = report.Curve("lfr_baseline");
  ASSERT_EQ(curve.size(), 10u);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].iou.miou, curve[i - 1].iou.miou);
  }
}

TEST(AnytimeCurveTest, CsvIsByteIdenticalAndSelfConsistent) {
  const SceneConfig scene = Scene("constant_velocity");
  const std::vector<TimeUs> dts{20'000, 60'000};
  const BenchReport a = AnytimeCurve(scene, AllAnytimeMethods(), dts, 3);
  const BenchReport b = AnytimeCurve(scene, AllAnytimeMethods(), dts, 3);
  const std::string csv = ReportCsv(a);
  EXPECT_EQ(csv, ReportCsv(b));

  std::istringstream in(csv);
  std::string line;
  int rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      EXPECT_EQ(line, "variant,dt_ms,miou,hole_fraction,per_class_iou,confusion");
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = Split(line, ',');
    ASSERT_EQ(fields.size(), 6u);
    const std::vector<std::string> counts = Split(fields[5], ';');
    const int k = static_cast<int>(std::lround(std::sqrt(counts.size())));
    ASSERT_EQ(static_cast<std::size_t>(k * k), counts.size());
    ConfusionMatrix cm(k);
    for (int g = 0; g < k; ++g) {
      for (int p = 0; p < k; ++p) cm.at(g, p) = std::stoll(counts[g * k + p]);
    }
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%.6f", cm.MeanIou());
    EXPECT_EQ(fields[2], expected);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST(AnytimeCurveTest, RejectsUnknownMethodAndBadOffsets) {
  EXPECT_THROW(ParseAnytimeMethod("oracle"), InvalidArgumentError);
  EXPECT_EQ(ParseAnytimeMethod("ours_no_memory"), AnytimeMethod::kOursNoMemory);
  EXPECT_THROW(AnytimeCurve(Scene("static"), AllAnytimeMethods(), {200'000}, 1),
               InvalidArgumentError);
}

TEST(AblationTest, StaticSceneTiesAtOneWithoutNoise) {
  const SceneConfig scene = Scene("static");
  for (AblationKind kind : {AblationKind::kWarpDomain, AblationKind::kMemoryGap,
                            AblationKind::kConfidence}) {
    BenchSettings settings = DefaultSettings(kind);
    settings.noise_sigma = 0.0;
    const BenchReport report = AblationRun(kind, scene, 1, settings);
    EXPECT_FALSE(report.rows.empty());
    for (const BenchRow& row : report.rows) {
      EXPECT_EQ(row.iou.miou, 1.0) << ToString(kind) << " " << row.variant;
    }
  }
}

TEST(AblationTest, ConfidenceVariantsTieOnStaticSceneUnderNoise) {
  const BenchReport report = AblationRun(AblationKind::kConfidence, Scene("static"), 1);
  EXPECT_EQ(report.Row("consensus", 50'000).iou.miou,
            report.Row("constant", 50'000).iou.miou);
}

TEST(AblationTest, MemoryGapUsesTheLongOffsetGrid) {
  const BenchSettings s = DefaultMemoryGapSettings();
  EXPECT_EQ(s.dts, (std::vector<TimeUs>{50'000, 200'000, 400'000, 800'000}));
}

TEST(AblationTest, ParsesKinds) {
  EXPECT_EQ(ParseAblationKind("warp-domain"), AblationKind::kWarpDomain);
  EXPECT_EQ(ParseAblationKind("memory-gap"), AblationKind::kMemoryGap);
  EXPECT_EQ(ParseAblationKind("confidence"), AblationKind::kConfidence);
  EXPECT_THROW(ParseAblationKind("anytime"), InvalidArgumentError);
}

TEST(ReportSvgTest, DrawsOnePolylinePerVariant) {
  const BenchReport report =
      AnytimeCurve(Scene("static"), AllAnytimeMethods(), {10'000, 50'000}, 1);
  const std::string svg = ReportSvg(report, "static");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++count;
  }
  EXPECT_EQ(count, 4u);
}

TEST(ThroughputTest, ReportsPositiveRates) {
  const ThroughputStats stats = MeasureThroughput(Dims{32, 32}, 2, 2);
  ASSERT_EQ(stats.splat_pixels_per_s.size(), 2u);
  ASSERT_EQ(stats.voxelize_events_per_s.size(), 2u);
  for (double v : stats.splat_pixels_per_s) EXPECT_GT(v, 0.0);
  for (double v : stats.voxelize_events_per_s) EXPECT_GT(v, 0.0);
  EXPECT_EQ(ThroughputStats::Variation({2.0, 2.0, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(ThroughputStats::Mean({1.0, 2.0, 3.0}), 2.0);
}

}  // namespace
}  // namespace anyprop
