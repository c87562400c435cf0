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

#include "anyprop/pipeline.h"

#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "anyprop/status.h"

namespace anyprop {

KeyframeState EncodeKeyframe(const IntensityFrame& frame,
                             const LabelMap& labels, TimeUs interval,
                             double smoothing) {
  if (!(frame.values.dims() == labels.dims())) {
    throw InvalidArgumentError("EncodeKeyframe: frame " +
                               ToString(frame.values.dims()) + " vs labels " +
                               ToString(labels.dims()));
  }
  if (labels.num_classes < 1) {
    throw InvalidArgumentError("EncodeKeyframe: num_classes must be >= 1");
  }
  if (!(smoothing >= 0.0 && smoothing <= 1.0)) {
    throw InvalidArgumentError("EncodeKeyframe: smoothing must be in [0, 1]");
  }
  if (interval <= 0) {
    throw InvalidArgumentError("EncodeKeyframe: interval must be positive");
  }
  const Dims& dims = labels.dims();
  const int classes = labels.num_classes;
  KeyframeState state;
  state.frame = frame;
  state.labels = labels;
  state.t = labels.timestamp;
  state.interval = interval;
  state.feature = FeatureMap(classes, dims, ChannelSemantics::kClassProb,
                             labels.timestamp);
  const double floor_value = smoothing / classes;
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const int label = labels.labels.at(y, x);
      if (label < 0 || label >= classes) {
        throw InvalidArgumentError("EncodeKeyframe: label " +
                                   std::to_string(label) + " at (" +
                                   std::to_string(x) + "," + std::to_string(y) +
                                   ") outside [0, " + std::to_string(classes) +
                                   ")");
      }
      for (int c = 0; c < classes; ++c) {
        state.feature.at(c, y, x) =
            c == label ? (1.0 - smoothing) + floor_value : floor_value;
      }
    }
  }
  return state;
}

LabelMap DecodeLabels(const FeatureMap& feature) {
  const Dims& dims = feature.dims();
  LabelMap out;
  out.labels = Plane<int>(dims, 0);
  out.timestamp = feature.timestamp();
  out.num_classes = feature.channels();
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      int best = 0;
      double best_value = feature.at(0, y, x);
      for (int c = 1; c < feature.channels(); ++c) {
        if (feature.at(c, y, x) > best_value) {
          best_value = feature.at(c, y, x);
          best = c;
        }
      }
      out.labels.at(y, x) = best;
    }
  }
  return out;
}

namespace {

bool ParseSwitch(const std::string& value, const std::string& key,
                 std::int64_t line) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ParseError("options line " + std::to_string(line) + ": '" + key +
                       "' expects on/off, got '" + value + "'",
                   line);
}

}  // namespace

PipelineOptions ParsePipelineOptions(std::istream& in, PipelineOptions base) {
  PipelineOptions opts = std::move(base);
  std::string raw;
  std::int64_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = raw.substr(0, raw.find('#'));
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw ParseError("options line " + std::to_string(line_no) +
                           ": expected key = value",
                       line_no);
    }
    std::istringstream key_stream(line.substr(0, eq));
    std::istringstream value_stream(line.substr(eq + 1));
    std::string key;
    std::string value;
    key_stream >> key;
    value_stream >> value;
    auto number = [&]() {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        throw ParseError("options line " + std::to_string(line_no) +
                             ": bad number for '" + key + "'",
                         line_no);
      }
    };
    auto integer = [&]() { return static_cast<int>(number()); };
    if (key == "bins") {
      opts.bins = integer();
    } else if (key == "flow_radius") {
      opts.flow.radius = integer();
    } else if (key == "flow_patch") {
      opts.flow.patch = integer();
    } else if (key == "flow_iters") {
      opts.flow.iterations = integer();
    } else if (key == "flow_smooth") {
      opts.flow.smooth_passes = integer();
    } else if (key == "density_radius") {
      opts.confidence.density_radius = integer();
    } else if (key == "alpha") {
      opts.confidence.alpha = number();
    } else if (key == "beta") {
      opts.confidence.beta = number();
    } else if (key == "s_min") {
      opts.confidence.s_min = number();
    } else if (key == "s_max") {
      opts.confidence.s_max = number();
    } else if (key == "confidence") {
      opts.use_confidence = ParseSwitch(value, key, line_no);
    } else if (key == "refine_passes") {
      opts.refine_passes = integer();
    } else if (key == "memory") {
      opts.use_memory = ParseSwitch(value, key, line_no);
    } else if (key == "capacity") {
      opts.memory_capacity = integer();
    } else if (key == "tau") {
      opts.memory_temperature = number();
    } else if (key == "holes") {
      if (value == "source") {
        opts.holes = HolePolicy::kCopySource;
      } else if (value == "uniform") {
        opts.holes = HolePolicy::kUniform;
      } else {
        throw ParseError("options line " + std::to_string(line_no) +
                             ": holes must be source or uniform",
                         line_no);
      }
    } else {
      throw ParseError("options line " + std::to_string(line_no) +
                           ": unknown key '" + key + "'",
                       line_no);
    }
  }
  return opts;
}

PipelineOptions LoadPipelineOptions(const std::filesystem::path& path,
                                    PipelineOptions base) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open options " + path.string());
  return ParsePipelineOptions(in, std::move(base));
}

std::string FormatPipelineOptions(const PipelineOptions& o) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "bins = " << o.bins << '\n'
      << "flow_radius = " << o.flow.radius << '\n'
      << "flow_patch = " << o.flow.patch << '\n'
      << "flow_iters = " << o.flow.iterations << '\n'
      << "flow_smooth = " << o.flow.smooth_passes << '\n'
      << "density_radius = " << o.confidence.density_radius << '\n'
      << "alpha = " << o.confidence.alpha << '\n'
      << "beta = " << o.confidence.beta << '\n'
      << "s_min = " << o.confidence.s_min << '\n'
      << "s_max = " << o.confidence.s_max << '\n'
      << "confidence = " << (o.use_confidence ? "on" : "off") << '\n'
      << "refine_passes = " << o.refine_passes << '\n'
      << "memory = " << (o.use_memory ? "on" : "off") << '\n'
      << "capacity = " << o.memory_capacity << '\n'
      << "tau = " << o.memory_temperature << '\n'
      << "holes = "
      << (o.holes == HolePolicy::kUniform ? "uniform" : "source") << '\n';
  return out.str();
}

Pipeline::Pipeline(PipelineOptions options)
    : options_(std::move(options)),
      memory_(options_.memory_capacity, options_.memory_temperature) {}

void Pipeline::AddKeyframe(const KeyframeState& state) {
  if (options_.use_memory) memory_.Push(state.feature, state.t);
}

void Pipeline::CheckCoverage(const EventStream& events, TimeUs begin,
                             TimeUs end) const {
  const TimeSpan& span = events.span();
  if (span.Covers(begin, end)) return;
  const TimeUs missing_begin = span.begin > begin ? begin : span.end;
  const TimeUs missing_end = span.begin > begin ? std::min(span.begin, end) : end;
  throw InsufficientDataError(
      "events span [" + std::to_string(span.begin) + ", " +
          std::to_string(span.end) + "] us but [" + std::to_string(begin) +
          ", " + std::to_string(end) + "] us is required; missing [" +
          std::to_string(missing_begin) + ", " + std::to_string(missing_end) +
          "] us",
      missing_begin, missing_end);
}

FlowField Pipeline::EstimateMotion(const VoxelGrid& before,
                                   const VoxelGrid& after, TimeUs t_from,
                                   TimeUs t_to) const {
  if (options_.flow_override) {
    FlowField flow = options_.flow_override(t_from, t_to);
    if (!(flow.dims() == after.dims())) {
      throw InvalidArgumentError("flow override returned wrong dims");
    }
    return flow;
  }
  return EstimateFlow(before, after, options_.flow);
}

ConfidenceMap Pipeline::EstimateConfidence(const VoxelGrid& after,
                                           const FlowField& flow, TimeUs t_from,
                                           TimeUs t_to) const {
  if (options_.confidence_override) {
    ConfidenceMap conf = options_.confidence_override(t_from, t_to);
    if (!(conf.dims() == after.dims())) {
      throw InvalidArgumentError("confidence override returned wrong dims");
    }
    return conf;
  }
  if (!options_.use_confidence) return ConfidenceMap(after.dims(), 0.0);
  return ConsensusConfidence(after, flow, options_.confidence);
}

PredictionState Pipeline::Propagate(const KeyframeState& state,
                                    const EventStream& events,
                                    TimeUs dt) const {
  if (dt <= 0 || dt > state.interval) {
    throw InvalidArgumentError("Propagate: dt = " + std::to_string(dt) +
                               " us outside (0, " +
                               std::to_string(state.interval) + "]");
  }
  if (!(events.dims() == state.feature.dims())) {
    throw InvalidArgumentError("Propagate: event sensor " +
                               ToString(events.dims()) + " vs feature " +
                               ToString(state.feature.dims()));
  }
  const TimeUs t = state.t;
  CheckCoverage(events, t - state.interval, t + dt);

  PredictionState out;
  out.dt = dt;
  // The flow estimator compares two windows of equal length so that matched
  // patterns are displaced by exactly the motion over dt.
  out.voxel_before =
      Voxelize(Slice(events, t - dt, t), t - dt, t, options_.bins);
  out.voxel_after =
      Voxelize(Slice(events, t, t + dt), t, t + dt, options_.bins);
  out.flow = EstimateMotion(out.voxel_before, out.voxel_after, t, t + dt);
  out.confidence = EstimateConfidence(out.voxel_after, out.flow, t, t + dt);

  SplatResult splat =
      SoftmaxSplat(state.feature, out.flow, out.confidence, options_.holes);
  out.coverage = std::move(splat.coverage);
  out.splatted = std::move(splat.output);
  out.feature = Refine(out.splatted, options_.refine_passes, &out.coverage);
  if (options_.use_memory) out.feature = memory_.Enhance(out.feature);
  out.feature.set_timestamp(t + dt);
  out.labels = DecodeLabels(out.feature);
  return out;
}

FeatureMap Pipeline::TwoStageAlign(const KeyframeState& state,
                                   const EventStream& events,
                                   TimeUs mid) const {
  if (mid <= 0 || mid >= state.interval) {
    throw InvalidArgumentError("TwoStageAlign: midpoint " +
                               std::to_string(mid) + " us outside (0, " +
                               std::to_string(state.interval) + ")");
  }
  const TimeUs t = state.t;
  const TimeUs t_end = t + state.interval;
  CheckCoverage(events, t - state.interval, t_end);
  const PredictionState first = Propagate(state, events, mid);

  const VoxelGrid before =
      Voxelize(Slice(events, t, t + mid), t, t + mid, options_.bins);
  const VoxelGrid after =
      Voxelize(Slice(events, t + mid, t_end), t + mid, t_end, options_.bins);
  const FlowField flow = EstimateMotion(before, after, t + mid, t_end);
  const ConfidenceMap conf = EstimateConfidence(after, flow, t + mid, t_end);
  SplatResult second = SoftmaxSplat(first.feature, flow, conf, options_.holes);
  second.output.set_timestamp(t_end);
  return std::move(second.output);
}

}  // namespace anyprop
