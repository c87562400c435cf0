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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "anyprop/status.h"

namespace anyprop {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(std::max(num_classes, 0)) *
                  static_cast<std::size_t>(std::max(num_classes, 0)),
              0) {
  if (num_classes < 0) throw InvalidArgumentError("negative class count");
}

void ConfusionMatrix::Add(const LabelMap& pred, const LabelMap& gt) {
  if (!(pred.dims() == gt.dims())) {
    throw InvalidArgumentError("miou: prediction " + ToString(pred.dims()) +
                               " vs ground truth " + ToString(gt.dims()));
  }
  const std::size_t n = gt.labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int g = gt.labels[i];
    const int p = pred.labels[i];
    if (g < 0 || g >= num_classes_ || p < 0 || p >= num_classes_) {
      throw InvalidArgumentError("miou: label outside [0, " +
                                 std::to_string(num_classes_) + ")");
    }
    ++at(g, p);
  }
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts_) sum += c;
  return sum;
}

std::vector<std::optional<double>> ConfusionMatrix::PerClassIou() const {
  std::vector<std::optional<double>> iou(num_classes_);
  for (int k = 0; k < num_classes_; ++k) {
    std::int64_t row = 0;
    std::int64_t col = 0;
    for (int j = 0; j < num_classes_; ++j) {
      row += at(k, j);
      col += at(j, k);
    }
    const std::int64_t tp = at(k, k);
    const std::int64_t uni = row + col - tp;
    if (uni > 0) iou[k] = static_cast<double>(tp) / static_cast<double>(uni);
  }
  return iou;
}

double ConfusionMatrix::MeanIou() const {
  double sum = 0.0;
  int count = 0;
  for (const auto& v : PerClassIou()) {
    if (!v) continue;
    sum += *v;
    ++count;
  }
  return count == 0 ? 1.0 : sum / count;
}

IouResult ComputeMiou(const LabelMap& pred, const LabelMap& gt,
                      int num_classes) {
  if (num_classes < 1) throw InvalidArgumentError("miou: num_classes < 1");
  IouResult result{ConfusionMatrix(num_classes), {}, 0.0};
  result.confusion.Add(pred, gt);
  result.per_class = result.confusion.PerClassIou();
  result.miou = result.confusion.MeanIou();
  return result;
}

FlowField PerturbFlow(const FlowField& flow, double sigma, const Mask* region,
                      std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgumentError("PerturbFlow: sigma < 0");
  if (region != nullptr && !(region->dims() == flow.dims())) {
    throw InvalidArgumentError("PerturbFlow: mask dims mismatch");
  }
  FlowField out = flow;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    // Draw for every pixel so the noise at a pixel does not depend on the mask.
    const double du = noise(rng);
    const double dv = noise(rng);
    if (region != nullptr && (*region)[i] == 0) continue;
    out.u[i] += du;
    out.v[i] += dv;
  }
  return out;
}

std::vector<BenchRow> BenchReport::Curve(const std::string& variant) const {
  std::vector<BenchRow> out;
  for (const BenchRow& row : rows) {
    if (row.variant == variant) out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const BenchRow& a, const BenchRow& b) { return a.dt < b.dt; });
  return out;
}

const BenchRow& BenchReport::Row(const std::string& variant, TimeUs dt) const {
  for (const BenchRow& row : rows) {
    if (row.variant == variant && row.dt == dt) return row;
  }
  throw InvalidArgumentError("no report row for " + variant + " at " +
                             std::to_string(dt) + " us");
}

namespace {

constexpr TimeUs kMs = 1000;

std::vector<TimeUs> MsGrid(std::initializer_list<int> ms) {
  std::vector<TimeUs> out;
  for (int m : ms) out.push_back(m * kMs);
  return out;
}

// Keyframes, the event stream around the last one, and its timestamp.
struct Sequence {
  std::vector<KeyframeState> keyframes;
  EventStream events;
  TimeUs t = 0;
};

Sequence BuildSequence(const SceneConfig& scene, const BenchSettings& settings,
                       TimeUs horizon, double smoothing = kDefaultLabelSmoothing) {
  if (settings.interval <= 0 || settings.keyframes < 1) {
    throw InvalidArgumentError("bench: bad keyframe interval or count");
  }
  Sequence seq;
  for (int k = 0; k < settings.keyframes; ++k) {
    const TimeUs tk = settings.interval * (k + 1);
    const RenderedFrame r = RenderScene(scene, tk);
    seq.keyframes.push_back(
        EncodeKeyframe(r.frame, r.labels, settings.interval, smoothing));
  }
  seq.t = seq.keyframes.back().t;
  seq.events = SimulateEvents(scene, seq.t - settings.interval, seq.t + horizon,
                              settings.contrast, settings.sim_step);
  return seq;
}

TimeUs MaxDt(const std::vector<TimeUs>& dts, TimeUs interval) {
  if (dts.empty()) throw InvalidArgumentError("bench: empty dt list");
  TimeUs max_dt = 0;
  for (TimeUs dt : dts) {
    if (dt <= 0 || dt > interval) {
      throw InvalidArgumentError("bench: dt " + std::to_string(dt) +
                                 " us outside (0, " + std::to_string(interval) +
                                 "]");
    }
    max_dt = std::max(max_dt, dt);
  }
  return max_dt;
}

double HoleFraction(const Mask& coverage) {
  if (coverage.size() == 0) return 0.0;
  std::size_t holes = 0;
  for (std::uint8_t c : coverage.values()) holes += c == 0;
  return static_cast<double>(holes) / static_cast<double>(coverage.size());
}

BenchRow MakeRow(std::string variant, TimeUs dt, const LabelMap& pred,
                 const LabelMap& gt, int num_classes, double holes) {
  BenchRow row;
  row.variant = std::move(variant);
  row.dt = dt;
  row.iou = ComputeMiou(pred, gt, num_classes);
  row.hole_fraction = holes;
  return row;
}

// Pixels with no event energy within `radius`, i.e. where the consensus
// confidence falls back to its floor.
Mask EventFreeMask(const VoxelGrid& voxel, int radius) {
  const Plane<double> energy = voxel.AbsEnergy();
  const Dims& dims = voxel.dims();
  Mask mask(dims, 0);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      bool any = false;
      for (int dy = -radius; dy <= radius && !any; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dims.contains(x + dx, y + dy) && energy.at(y + dy, x + dx) != 0.0) {
            any = true;
            break;
          }
        }
      }
      mask.at(y, x) = any ? 0 : 1;
    }
  }
  return mask;
}

std::uint64_t MixSeed(std::uint64_t seed, TimeUs dt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(dt),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(dt) >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string EchoSettings(const SceneConfig& scene, const BenchSettings& s) {
  std::ostringstream out;
  out << "interval_us = " << s.interval << '\n'
      << "keyframes = " << s.keyframes << '\n'
      << "noise_sigma = " << s.noise_sigma << '\n'
      << "contrast = " << s.contrast << '\n'
      << "sim_step_us = " << s.sim_step << '\n'
      << FormatPipelineOptions(s.pipeline) << "# scene\n"
      << FormatSceneConfig(scene);
  return out.str();
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Nearest palette intensity; ties go to the class listed first (background,
// then objects in declaration order).
LabelMap RelabelByIntensity(const FeatureMap& image, const SceneConfig& scene,
                            TimeUs t) {
  std::vector<std::pair<double, int>> palette{{scene.background, 0}};
  for (const SceneObject& obj : scene.objects) {
    palette.emplace_back(obj.intensity, obj.class_id);
  }
  LabelMap out;
  out.labels = Plane<int>(image.dims(), 0);
  out.timestamp = t;
  out.num_classes = scene.num_classes;
  for (int y = 0; y < image.dims().height; ++y) {
    for (int x = 0; x < image.dims().width; ++x) {
      const double v = image.at(0, y, x);
      double best = std::abs(v - palette[0].first);
      int label = palette[0].second;
      for (const auto& [level, cls] : palette) {
        const double d = std::abs(v - level);
        if (d < best) {
          best = d;
          label = cls;
        }
      }
      out.labels.at(y, x) = label;
    }
  }
  return out;
}

BenchReport WarpDomainRun(const SceneConfig& scene, std::uint64_t seed,
                          const BenchSettings& settings) {
  BenchReport report;
  const TimeUs max_dt = MaxDt(settings.dts, settings.interval);
  const Sequence seq = BuildSequence(scene, settings, max_dt);
  const KeyframeState& key = seq.keyframes.back();
  const Dims& dims = scene.dims;
  FeatureMap image(1, dims, ChannelSemantics::kIntensity, key.t);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) image.at(0, y, x) = key.frame.values.at(y, x);
  }
  const FeatureMap one_hot =
      EncodeKeyframe(key.frame, key.labels, key.interval, 0.0).feature;
  FeatureMap generic = key.feature;
  generic.set_semantics(ChannelSemantics::kGeneric);

  for (TimeUs dt : settings.dts) {
    const TimeUs t1 = seq.t + dt;
    const VoxelGrid after =
        Voxelize(Slice(seq.events, seq.t, t1), seq.t, t1, settings.pipeline.bins);
    const FlowField flow = PerturbFlow(OracleFlow(scene, seq.t, t1),
                                       settings.noise_sigma, nullptr,
                                       MixSeed(seed, dt));
    const ConfidenceMap conf = settings.pipeline.use_confidence
                                   ? ConsensusConfidence(after, flow,
                                                         settings.pipeline.confidence)
                                   : ConfidenceMap(dims, 0.0);
    const LabelMap gt = RenderScene(scene, t1).labels;

    const DomainWarpResult img = WarpInDomain(WarpDomain::kImage, image, flow, conf);
    report.rows.push_back(MakeRow("image", dt, RelabelByIntensity(img.payload, scene, t1),
                                  gt, scene.num_classes, HoleFraction(img.coverage)));

    const DomainWarpResult seg =
        WarpInDomain(WarpDomain::kSegmentation, one_hot, flow, conf);
    report.rows.push_back(MakeRow("segmentation", dt, DecodeLabels(seg.payload), gt,
                                  scene.num_classes, HoleFraction(seg.coverage)));

    const DomainWarpResult feat =
        WarpInDomain(WarpDomain::kFeature, generic, flow, conf);
    FeatureMap refined = feat.payload;
    refined.set_semantics(ChannelSemantics::kClassProb);
    refined = Refine(refined, settings.pipeline.refine_passes, &feat.coverage);
    report.rows.push_back(MakeRow("feature", dt, DecodeLabels(refined), gt,
                                  scene.num_classes, HoleFraction(feat.coverage)));
  }
  return report;
}

BenchReport MemoryGapRun(const SceneConfig& scene, const BenchSettings& settings) {
  BenchReport report;
  const TimeUs max_dt = MaxDt(settings.dts, settings.interval);
  const Sequence seq = BuildSequence(scene, settings, max_dt);
  const double s_min = settings.pipeline.confidence.s_min;
  const double s_max = settings.pipeline.confidence.s_max;
  for (const bool memory : {true, false}) {
    PipelineOptions opts = settings.pipeline;
    opts.use_memory = memory;
    opts.flow_override = [&scene](TimeUs a, TimeUs b) {
      return OracleFlow(scene, a, b);
    };
    opts.confidence_override = [&scene, s_min, s_max](TimeUs a, TimeUs) {
      return OracleConfidence(scene, a, s_min, s_max);
    };
    Pipeline pipeline(opts);
    for (const KeyframeState& k : seq.keyframes) pipeline.AddKeyframe(k);
    for (TimeUs dt : settings.dts) {
      const PredictionState pred =
          pipeline.Propagate(seq.keyframes.back(), seq.events, dt);
      report.rows.push_back(MakeRow(memory ? "memory" : "no_memory", dt, pred.labels,
                                    RenderScene(scene, seq.t + dt).labels,
                                    scene.num_classes, HoleFraction(pred.coverage)));
    }
  }
  return report;
}

BenchReport ConfidenceRun(const SceneConfig& scene, std::uint64_t seed,
                          const BenchSettings& settings) {
  BenchReport report;
  const TimeUs max_dt = MaxDt(settings.dts, settings.interval);
  const Sequence seq = BuildSequence(scene, settings, max_dt);
  const KeyframeState& key = seq.keyframes.back();
  for (TimeUs dt : settings.dts) {
    const TimeUs t1 = seq.t + dt;
    const VoxelGrid after =
        Voxelize(Slice(seq.events, seq.t, t1), seq.t, t1, settings.pipeline.bins);
    const Mask event_free =
        EventFreeMask(after, settings.pipeline.confidence.density_radius);
    const FlowField noisy = PerturbFlow(OracleFlow(scene, seq.t, t1),
                                        settings.noise_sigma, &event_free,
                                        MixSeed(seed, dt));
    const LabelMap gt = RenderScene(scene, t1).labels;
    for (const bool consensus : {true, false}) {
      PipelineOptions opts = settings.pipeline;
      opts.use_confidence = consensus;
      opts.flow_override = [&noisy](TimeUs, TimeUs) { return noisy; };
      Pipeline pipeline(opts);
      for (const KeyframeState& k : seq.keyframes) pipeline.AddKeyframe(k);
      const PredictionState pred = pipeline.Propagate(key, seq.events, dt);
      report.rows.push_back(MakeRow(consensus ? "consensus" : "constant", dt,
                                    pred.labels, gt, scene.num_classes,
                                    HoleFraction(pred.coverage)));
    }
  }
  return report;
}

}  // namespace

BenchSettings DefaultAnytimeSettings() {
  BenchSettings s;
  s.interval = 100 * kMs;
  s.keyframes = 2;
  s.dts = MsGrid({10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
  s.pipeline.flow.radius = 6;
  s.pipeline.flow.patch = 7;
  s.pipeline.memory_temperature = 0.1;
  return s;
}

BenchSettings DefaultWarpDomainSettings() {
  BenchSettings s;
  s.interval = 100 * kMs;
  s.keyframes = 1;
  s.dts = MsGrid({50});
  s.noise_sigma = 1.0;
  s.pipeline.use_memory = false;
  return s;
}

BenchSettings DefaultMemoryGapSettings() {
  BenchSettings s;
  s.interval = 800 * kMs;
  s.keyframes = 4;
  s.dts = MsGrid({50, 200, 400, 800});
  s.pipeline.holes = HolePolicy::kUniform;
  s.pipeline.memory_temperature = 0.1;
  return s;
}

BenchSettings DefaultConfidenceSettings() {
  BenchSettings s;
  s.interval = 100 * kMs;
  s.keyframes = 1;
  s.dts = MsGrid({50});
  s.noise_sigma = 2.0;
  s.pipeline.use_memory = false;
  return s;
}

const char* ToString(AnytimeMethod method) {
  switch (method) {
    case AnytimeMethod::kLfrBaseline:
      return "lfr_baseline";
    case AnytimeMethod::kOurs:
      return "ours";
    case AnytimeMethod::kOursNoMemory:
      return "ours_no_memory";
    case AnytimeMethod::kOursNoConfidence:
      return "ours_no_confidence";
  }
  return "unknown";
}

AnytimeMethod ParseAnytimeMethod(const std::string& name) {
  for (AnytimeMethod m : AllAnytimeMethods()) {
    if (name == ToString(m)) return m;
  }
  throw InvalidArgumentError("unknown method '" + name + "'");
}

std::vector<AnytimeMethod> AllAnytimeMethods() {
  return {AnytimeMethod::kLfrBaseline, AnytimeMethod::kOurs,
          AnytimeMethod::kOursNoMemory, AnytimeMethod::kOursNoConfidence};
}

BenchReport AnytimeCurve(const SceneConfig& scene,
                         const std::vector<AnytimeMethod>& methods,
                         const std::vector<TimeUs>& dts, std::uint64_t seed,
                         const BenchSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const TimeUs max_dt = MaxDt(dts, settings.interval);
  BenchReport report;
  report.kind = "anytime";
  report.seed = seed;
  report.config_echo = EchoSettings(scene, settings);
  const Sequence seq = BuildSequence(scene, settings, max_dt);
  const KeyframeState& key = seq.keyframes.back();
  const Pipeline estimator(settings.pipeline);

  for (TimeUs dt : dts) {
    const LabelMap gt = RenderScene(scene, seq.t + dt).labels;
    std::optional<FlowField> flow;
    for (AnytimeMethod method : methods) {
      if (method == AnytimeMethod::kLfrBaseline) {
        report.rows.push_back(MakeRow(ToString(method), dt, key.labels, gt,
                                      scene.num_classes, 0.0));
        continue;
      }
      if (!flow) {
        // One motion estimate per offset, shared by every variant.
        const TimeUs t = seq.t;
        flow = estimator.EstimateMotion(
            Voxelize(Slice(seq.events, t - dt, t), t - dt, t, settings.pipeline.bins),
            Voxelize(Slice(seq.events, t, t + dt), t, t + dt, settings.pipeline.bins),
            t, t + dt);
      }
      PipelineOptions opts = settings.pipeline;
      opts.use_memory = method != AnytimeMethod::kOursNoMemory;
      opts.use_confidence = method != AnytimeMethod::kOursNoConfidence;
      if (!opts.flow_override) {
        opts.flow_override = [&flow](TimeUs, TimeUs) { return *flow; };
      }
      Pipeline pipeline(opts);
      for (const KeyframeState& k : seq.keyframes) pipeline.AddKeyframe(k);
      const PredictionState pred = pipeline.Propagate(key, seq.events, dt);
      report.rows.push_back(MakeRow(ToString(method), dt, pred.labels, gt,
                                    scene.num_classes, HoleFraction(pred.coverage)));
    }
  }
  report.runtime_seconds = Seconds(start);
  return report;
}

const char* ToString(AblationKind kind) {
  switch (kind) {
    case AblationKind::kWarpDomain:
      return "warp-domain";
    case AblationKind::kMemoryGap:
      return "memory-gap";
    case AblationKind::kConfidence:
      return "confidence";
  }
  return "unknown";
}

AblationKind ParseAblationKind(const std::string& name) {
  for (AblationKind k : {AblationKind::kWarpDomain, AblationKind::kMemoryGap,
                         AblationKind::kConfidence}) {
    if (name == ToString(k)) return k;
  }
  throw InvalidArgumentError("unknown ablation '" + name + "'");
}

BenchSettings DefaultSettings(AblationKind kind) {
  switch (kind) {
    case AblationKind::kWarpDomain:
      return DefaultWarpDomainSettings();
    case AblationKind::kMemoryGap:
      return DefaultMemoryGapSettings();
    case AblationKind::kConfidence:
      return DefaultConfidenceSettings();
  }
  throw InvalidArgumentError("unknown ablation kind");
}

BenchReport AblationRun(AblationKind kind, const SceneConfig& scene,
                        std::uint64_t seed, const BenchSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  BenchReport report;
  switch (kind) {
    case AblationKind::kWarpDomain:
      report = WarpDomainRun(scene, seed, settings);
      break;
    case AblationKind::kMemoryGap:
      report = MemoryGapRun(scene, settings);
      break;
    case AblationKind::kConfidence:
      report = ConfidenceRun(scene, seed, settings);
      break;
    default:
      throw InvalidArgumentError("unknown ablation kind");
  }
  report.kind = ToString(kind);
  report.seed = seed;
  report.config_echo = EchoSettings(scene, settings);
  report.runtime_seconds = Seconds(start);
  return report;
}

BenchReport AblationRun(AblationKind kind, const SceneConfig& scene,
                        std::uint64_t seed) {
  return AblationRun(kind, scene, seed, DefaultSettings(kind));
}

namespace {

std::string Fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void WriteReportCsv(const BenchReport& report, std::ostream& out) {
  out << "# kind " << report.kind << "\n# seed " << report.seed << '\n';
  std::istringstream echo(report.config_echo);
  for (std::string line; std::getline(echo, line);) {
    if (!line.empty() && line[0] == '#') line = line.substr(1);
    out << "# " << line << '\n';
  }
  out << "variant,dt_ms,miou,hole_fraction,per_class_iou,confusion\n";
  for (const BenchRow& row : report.rows) {
    out << row.variant << ',' << Fixed6(static_cast<double>(row.dt) / kMs) << ','
        << Fixed6(row.iou.miou) << ',' << Fixed6(row.hole_fraction) << ',';
    for (std::size_t k = 0; k < row.iou.per_class.size(); ++k) {
      if (k) out << ';';
      out << (row.iou.per_class[k] ? Fixed6(*row.iou.per_class[k]) : "nan");
    }
    out << ',';
    const ConfusionMatrix& cm = row.iou.confusion;
    for (int g = 0; g < cm.num_classes(); ++g) {
      for (int p = 0; p < cm.num_classes(); ++p) {
        if (g || p) out << ';';
        out << cm.at(g, p);
      }
    }
    out << '\n';
  }
}

std::string ReportCsv(const BenchReport& report) {
  std::ostringstream out;
  WriteReportCsv(report, out);
  return out.str();
}

double ThroughputStats::Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double ThroughputStats::Variation(const std::vector<double>& v) {
  const double mean = Mean(v);
  if (v.size() < 2 || mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / mean;
}

ThroughputStats MeasureThroughput(Dims dims, int channels, int reps,
                                  std::uint64_t seed) {
  if (dims.area() == 0 || channels < 1 || reps < 1) {
    throw InvalidArgumentError("perf: size, channels and reps must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  FeatureMap payload(channels, dims, ChannelSemantics::kGeneric);
  for (double& v : payload.values()) v = unit(rng);
  FlowField flow(dims);
  ConfidenceMap conf(dims);
  for (std::size_t i = 0; i < dims.area(); ++i) {
    flow.u[i] = shift(rng);
    flow.v[i] = shift(rng);
    conf.s[i] = 4.0 * unit(rng) - 2.0;
  }
  const std::size_t num_events = dims.area() * 8;
  const TimeUs window = 100'000;
  std::vector<Event> events(num_events);
  for (std::size_t i = 0; i < num_events; ++i) {
    events[i] = Event{static_cast<std::uint16_t>(rng() % dims.width),
                      static_cast<std::uint16_t>(rng() % dims.height),
                      static_cast<TimeUs>(i * window / num_events),
                      static_cast<std::int8_t>(rng() % 2 ? 1 : -1)};
  }
  const EventStream stream(dims, std::move(events));

  // Each repetition keeps the best of a few timed windows, and each window
  // runs long enough that timer resolution stays small against it. The best
  // window filters out intervals where the process was descheduled.
  constexpr double kMinSeconds = 0.05;
  constexpr int kWindows = 4;
  auto best_rate = [&](const auto& body, std::size_t units_per_call) {
    double best = 0.0;
    for (int w = 0; w < kWindows; ++w) {
      const auto start = std::chrono::steady_clock::now();
      std::size_t units = 0;
      do {
        body();
        units += units_per_call;
      } while (Seconds(start) < kMinSeconds);
      best = std::max(best, static_cast<double>(units) / Seconds(start));
    }
    return best;
  };
  ThroughputStats stats;
  for (int r = 0; r < reps; ++r) {
    stats.splat_pixels_per_s.push_back(best_rate(
        [&] { SplatResult res = SoftmaxSplat(payload, flow, conf); }, dims.area()));
    stats.voxelize_events_per_s.push_back(best_rate(
        [&] { VoxelGrid grid = Voxelize(stream, 0, window, kDefaultBins); },
        stream.size()));
  }
  return stats;
}

}  // namespace anyprop
