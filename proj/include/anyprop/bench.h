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

#ifndef ANYPROP_BENCH_H_
#define ANYPROP_BENCH_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anyprop/pipeline.h"
#include "anyprop/scene.h"
#include "anyprop/tensor.h"

namespace anyprop {

// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  void Add(const LabelMap& pred, const LabelMap& gt);

  int num_classes() const { return num_classes_; }
  std::int64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
  std::int64_t& at(int gt, int pred) {
    return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
  std::int64_t total() const;

  // TP / (TP + FP + FN); nullopt for classes absent from both maps.
  std::vector<std::optional<double>> PerClassIou() const;
  // Mean over classes with a nonzero union; 1.0 if there are none.
  double MeanIou() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

struct IouResult {
  ConfusionMatrix confusion;
  std::vector<std::optional<double>> per_class;
  double miou = 0.0;
};

// Throws InvalidArgumentError on dims mismatch or out-of-range labels.
IouResult ComputeMiou(const LabelMap& pred, const LabelMap& gt,
                      int num_classes);

// Adds N(0, sigma^2) noise to both flow components inside `region` (all
// pixels when null). Same seed, same output.
FlowField PerturbFlow(const FlowField& flow, double sigma, const Mask* region,
                      std::uint64_t seed);

struct BenchRow {
  std::string variant;
  TimeUs dt = 0;
  IouResult iou;
  double hole_fraction = 0.0;
};

struct BenchReport {
  std::string kind;
  std::uint64_t seed = 0;
  std::string config_echo;
  std::vector<BenchRow> rows;
  double runtime_seconds = 0.0;  // not part of the CSV

  // Rows of one variant in dt order.
  std::vector<BenchRow> Curve(const std::string& variant) const;
  const BenchRow& Row(const std::string& variant, TimeUs dt) const;
};

// Shared protocol knobs. Keyframes sit at interval * (k + 1), k < keyframes;
// predictions start from the last one.
struct BenchSettings {
  TimeUs interval = 100'000;
  int keyframes = 2;
  std::vector<TimeUs> dts;
  PipelineOptions pipeline;
  double noise_sigma = 0.0;
  double contrast = kDefaultContrast;
  TimeUs sim_step = kDefaultSimStepUs;
};

BenchSettings DefaultAnytimeSettings();
BenchSettings DefaultWarpDomainSettings();
BenchSettings DefaultMemoryGapSettings();
BenchSettings DefaultConfidenceSettings();

enum class AnytimeMethod { kLfrBaseline, kOurs, kOursNoMemory, kOursNoConfidence };

const char* ToString(AnytimeMethod method);
AnytimeMethod ParseAnytimeMethod(const std::string& name);
std::vector<AnytimeMethod> AllAnytimeMethods();

// mIoU against the rendered ground truth at every dt for each method.
BenchReport AnytimeCurve(const SceneConfig& scene,
                         const std::vector<AnytimeMethod>& methods,
                         const std::vector<TimeUs>& dts, std::uint64_t seed,
                         const BenchSettings& settings = DefaultAnytimeSettings());

enum class AblationKind { kWarpDomain, kMemoryGap, kConfidence };

const char* ToString(AblationKind kind);
AblationKind ParseAblationKind(const std::string& name);
BenchSettings DefaultSettings(AblationKind kind);

// kWarpDomain: image / segmentation / feature warping under noisy flow.
// kMemoryGap: memory / no_memory over long offsets with oracle motion.
// kConfidence: consensus / constant log-precision with noise injected where
// no events fired.
BenchReport AblationRun(AblationKind kind, const SceneConfig& scene,
                        std::uint64_t seed, const BenchSettings& settings);
BenchReport AblationRun(AblationKind kind, const SceneConfig& scene,
                        std::uint64_t seed);

// variant,dt_ms,miou,hole_fraction,per_class_iou,confusion with floats at six
// decimals; per-class entries and confusion counts are ';'-separated,
// excluded classes print as "nan".
void WriteReportCsv(const BenchReport& report, std::ostream& out);
std::string ReportCsv(const BenchReport& report);

// Minimal line chart of mIoU against dt, one polyline per variant.
std::string ReportSvg(const BenchReport& report, const std::string& title);

struct ThroughputStats {
  std::vector<double> splat_pixels_per_s;
  std::vector<double> voxelize_events_per_s;

  static double Mean(const std::vector<double>& v);
  // Standard deviation over mean.
  static double Variation(const std::vector<double>& v);
};

ThroughputStats MeasureThroughput(Dims dims, int channels, int reps,
                                  std::uint64_t seed = 1);

}  // namespace anyprop

#endif  // ANYPROP_BENCH_H_
