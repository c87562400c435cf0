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

// Command-line front end: event simulation, voxelization, propagation,
// benchmarks and the splat throughput microbenchmark.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "anyprop/bench.h"
#include "anyprop/events.h"
#include "anyprop/motion.h"
#include "anyprop/pipeline.h"
#include "anyprop/scene.h"
#include "anyprop/status.h"
#include "anyprop/warp.h"

namespace {

using anyprop::TimeUs;

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw anyprop::InvalidArgumentError("cannot open " + path.string());
  out << text;
}

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

anyprop::Dims ParseSize(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw anyprop::InvalidArgumentError("size must be HxW, got '" + text + "'");
  }
  return anyprop::Dims{std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

struct SimulateArgs {
  std::string scene;
  std::string out;
  TimeUs t0 = 0;
  TimeUs t1 = 200'000;
  double contrast = anyprop::kDefaultContrast;
  TimeUs dt_sim = anyprop::kDefaultSimStepUs;
};

int RunSimulate(const SimulateArgs& a) {
  const anyprop::SceneConfig scene = anyprop::LoadSceneConfig(a.scene);
  const anyprop::EventStream events =
      anyprop::SimulateEvents(scene, a.t0, a.t1, a.contrast, a.dt_sim);
  anyprop::WriteEvents(events, a.out, anyprop::EventFormatFromPath(a.out));
  std::cout << "events " << events.size() << '\n';
  return 0;
}

struct VoxelizeArgs {
  std::string events;
  std::string out;
  TimeUs t0 = 0;
  TimeUs t1 = 0;
  int bins = anyprop::kDefaultBins;
};

int RunVoxelize(const VoxelizeArgs& a) {
  const anyprop::EventStream events =
      anyprop::ReadEvents(a.events, anyprop::EventFormatFromPath(a.events));
  const anyprop::VoxelGrid grid = anyprop::Voxelize(events, a.t0, a.t1, a.bins);
  anyprop::WriteVoxelGrid(grid, a.out);
  std::cout << "sum " << Fixed6(grid.Sum()) << '\n';
  return 0;
}

struct PropagateArgs {
  std::string scene;
  std::string config;
  std::string out;
  TimeUs dt = 50'000;
  TimeUs interval = 100'000;
  int keyframes = 2;
  bool no_memory = false;
  bool no_confidence = false;
  bool flow_oracle = false;
  bool confidence_oracle = false;
};

int RunPropagate(const PropagateArgs& a) {
  const anyprop::SceneConfig scene = anyprop::LoadSceneConfig(a.scene);
  anyprop::PipelineOptions opts;
  if (!a.config.empty()) opts = anyprop::LoadPipelineOptions(a.config);
  if (a.no_memory) opts.use_memory = false;
  if (a.no_confidence) opts.use_confidence = false;
  if (a.flow_oracle) {
    opts.flow_override = [&scene](TimeUs t0, TimeUs t1) {
      return anyprop::OracleFlow(scene, t0, t1);
    };
  }
  if (a.confidence_oracle) {
    const double s_min = opts.confidence.s_min;
    const double s_max = opts.confidence.s_max;
    opts.confidence_override = [&scene, s_min, s_max](TimeUs t0, TimeUs) {
      return anyprop::OracleConfidence(scene, t0, s_min, s_max);
    };
  }
  if (a.keyframes < 1) throw anyprop::InvalidArgumentError("--keyframes < 1");

  anyprop::Pipeline pipeline(opts);
  anyprop::KeyframeState key;
  for (int k = 0; k < a.keyframes; ++k) {
    const anyprop::RenderedFrame r = anyprop::RenderScene(scene, a.interval * (k + 1));
    key = anyprop::EncodeKeyframe(r.frame, r.labels, a.interval);
    pipeline.AddKeyframe(key);
  }
  const anyprop::EventStream events =
      anyprop::SimulateEvents(scene, key.t - a.interval, key.t + a.dt);
  const anyprop::PredictionState pred = pipeline.Propagate(key, events, a.dt);

  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  anyprop::WriteFeatureMap(pred.feature, dir / "feature.ftr");
  anyprop::WriteFlow(pred.flow, dir / "flow.flw");
  anyprop::WriteConfidence(pred.confidence, dir / "confidence.cnf");
  std::string labels;
  for (int y = 0; y < pred.labels.dims().height; ++y) {
    for (int x = 0; x < pred.labels.dims().width; ++x) {
      if (x) labels += ',';
      labels += std::to_string(pred.labels.labels.at(y, x));
    }
    labels += '\n';
  }
  WriteText(dir / "labels.csv", labels);

  const anyprop::LabelMap gt = anyprop::RenderScene(scene, key.t + a.dt).labels;
  const anyprop::IouResult iou = anyprop::ComputeMiou(pred.labels, gt, scene.num_classes);
  std::size_t holes = 0;
  for (std::uint8_t c : pred.coverage.values()) holes += c == 0;
  const std::string summary =
      "t_us," + std::to_string(key.t) + "\ndt_us," + std::to_string(a.dt) +
      "\nevents," + std::to_string(events.size()) + "\nmiou," + Fixed6(iou.miou) +
      "\nhole_fraction," +
      Fixed6(static_cast<double>(holes) / static_cast<double>(pred.coverage.size())) +
      '\n';
  WriteText(dir / "summary.csv", summary);
  std::cout << summary;
  return 0;
}

struct BenchArgs {
  std::string kind;
  std::string scene;
  std::string config;
  std::string csv;
  std::string svg;
  std::uint64_t seed = 0;
};

int RunBench(const BenchArgs& a) {
  const anyprop::SceneConfig scene = anyprop::LoadSceneConfig(a.scene);
  anyprop::BenchReport report;
  if (a.kind == "anytime") {
    anyprop::BenchSettings settings = anyprop::DefaultAnytimeSettings();
    if (!a.config.empty()) {
      settings.pipeline = anyprop::LoadPipelineOptions(a.config, settings.pipeline);
    }
    report = anyprop::AnytimeCurve(scene, anyprop::AllAnytimeMethods(), settings.dts,
                                   a.seed, settings);
  } else {
    const anyprop::AblationKind kind = anyprop::ParseAblationKind(a.kind);
    anyprop::BenchSettings settings = anyprop::DefaultSettings(kind);
    if (!a.config.empty()) {
      settings.pipeline = anyprop::LoadPipelineOptions(a.config, settings.pipeline);
    }
    report = anyprop::AblationRun(kind, scene, a.seed, settings);
  }
  WriteText(a.csv, anyprop::ReportCsv(report));
  if (!a.svg.empty()) WriteText(a.svg, anyprop::ReportSvg(report, a.kind));
  for (const anyprop::BenchRow& row : report.rows) {
    std::cout << row.variant << " dt=" << row.dt / 1000 << "ms miou=" << Fixed6(row.iou.miou)
              << " holes=" << Fixed6(row.hole_fraction) << '\n';
  }
  std::cerr << "runtime_s " << Fixed6(report.runtime_seconds) << '\n';
  return 0;
}

struct PerfArgs {
  std::string size = "128x128";
  std::string csv;
  int channels = 8;
  int reps = 5;
};

int RunPerf(const PerfArgs& a) {
  const anyprop::ThroughputStats stats =
      anyprop::MeasureThroughput(ParseSize(a.size), a.channels, a.reps);
  std::string text = "metric,mean,variation\n";
  text += "splat_pixels_per_s," +
          Fixed6(anyprop::ThroughputStats::Mean(stats.splat_pixels_per_s)) + ',' +
          Fixed6(anyprop::ThroughputStats::Variation(stats.splat_pixels_per_s)) + '\n';
  text += "voxelize_events_per_s," +
          Fixed6(anyprop::ThroughputStats::Mean(stats.voxelize_events_per_s)) + ',' +
          Fixed6(anyprop::ThroughputStats::Variation(stats.voxelize_events_per_s)) +
          '\n';
  if (!a.csv.empty()) WriteText(a.csv, text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anyprop: event-guided anytime label propagation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate events for a scene");
  simulate->add_option("--scene", sim.scene, "Scene file")->required();
  simulate->add_option("--out", sim.out, "Output events (.bin/.evs/.csv)")->required();
  simulate->add_option("--t0", sim.t0, "Start time (us)");
  simulate->add_option("--t1", sim.t1, "End time (us)");
  simulate->add_option("--contrast", sim.contrast, "Contrast threshold");
  simulate->add_option("--dt-sim", sim.dt_sim, "Simulation step (us)");

  VoxelizeArgs vox;
  CLI::App* voxelize = app.add_subcommand("voxelize", "Voxelize an event file");
  voxelize->add_option("--events", vox.events, "Input events")->required();
  voxelize->add_option("--t0", vox.t0, "Window start (us)")->required();
  voxelize->add_option("--t1", vox.t1, "Window end (us)")->required();
  voxelize->add_option("--bins", vox.bins, "Temporal bins");
  voxelize->add_option("--out", vox.out, "Output voxel grid (VOX1)")->required();

  PropagateArgs prop;
  CLI::App* propagate =
      app.add_subcommand("propagate", "Propagate keyframe labels to t + dt");
  propagate->add_option("--scene", prop.scene, "Scene file")->required();
  propagate->add_option("--dt-us", prop.dt, "Offset from the keyframe (us)")->required();
  propagate->add_option("--interval-us", prop.interval, "Keyframe interval (us)");
  propagate->add_option("--keyframes", prop.keyframes, "Keyframes stored before t");
  propagate->add_option("--config", prop.config, "Pipeline options file");
  propagate->add_flag("--no-memory", prop.no_memory, "Disable memory enhancement");
  propagate->add_flag("--no-confidence", prop.no_confidence,
                      "Use a constant log-precision");
  propagate->add_flag("--flow-oracle", prop.flow_oracle, "Use ground-truth motion");
  propagate->add_flag("--confidence-oracle", prop.confidence_oracle,
                      "Use depth-ordered ground-truth confidence");
  propagate->add_option("--out", prop.out, "Output directory")->required();

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark scenario");
  bench_cmd->add_option("kind", bench.kind, "anytime|warp-domain|memory-gap|confidence")
      ->required()
      ->check(CLI::IsMember({"anytime", "warp-domain", "memory-gap", "confidence"}));
  bench_cmd->add_option("--scene", bench.scene, "Scene file")->required();
  bench_cmd->add_option("--seed", bench.seed, "Noise seed");
  bench_cmd->add_option("--config", bench.config, "Pipeline options file");
  bench_cmd->add_option("--csv", bench.csv, "Output CSV")->required();
  bench_cmd->add_option("--svg", bench.svg, "Output SVG chart");

  PerfArgs perf;
  std::string perf_target;
  CLI::App* perf_cmd = app.add_subcommand("perf", "Throughput microbenchmark");
  perf_cmd->add_option("target", perf_target, "Benchmark target")
      ->required()
      ->check(CLI::IsMember({"splat"}));
  perf_cmd->add_option("--size", perf.size, "Frame size HxW");
  perf_cmd->add_option("--channels", perf.channels, "Payload channels");
  perf_cmd->add_option("--reps", perf.reps, "Repetitions");
  perf_cmd->add_option("--csv", perf.csv, "Output CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return RunSimulate(sim);
    if (*voxelize) return RunVoxelize(vox);
    if (*propagate) return RunPropagate(prop);
    if (*bench_cmd) return RunBench(bench);
    if (*perf_cmd) return RunPerf(perf);
  } catch (const anyprop::InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
