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

#include "anyprop/warp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "anyprop/parallel.h"
#include "anyprop/status.h"
#include "binary_io.h"

namespace anyprop {
namespace {

double Tent(double d) { return std::max(0.0, 1.0 - std::abs(d)); }

void CheckDims(const FeatureMap& payload, const FlowField& flow,
               const char* where) {
  if (!(payload.dims() == flow.dims())) {
    throw InvalidArgumentError(std::string(where) + ": payload " +
                               ToString(payload.dims()) + " vs flow " +
                               ToString(flow.dims()));
  }
}

// Landing site of a source pixel and its four bilinear neighbors.
struct Landing {
  double x;
  double y;
  int x0;
  int y0;

  Landing(int sx, int sy, double u, double v)
      : x(sx + u),
        y(sy + v),
        x0(static_cast<int>(std::floor(x))),
        y0(static_cast<int>(std::floor(y))) {}
};

int ArgmaxChannel(const FeatureMap& f, int y, int x) {
  int best = 0;
  double best_value = f.at(0, y, x);
  for (int c = 1; c < f.channels(); ++c) {
    if (f.at(c, y, x) > best_value) {
      best_value = f.at(c, y, x);
      best = c;
    }
  }
  return best;
}

std::vector<double> ExpShiftedConfidence(const ConfidenceMap& confidence) {
  double max_s = -std::numeric_limits<double>::infinity();
  for (double s : confidence.s.values()) max_s = std::max(max_s, s);
  std::vector<double> w(confidence.s.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(confidence.s[i] - max_s);
  }
  return w;
}

void FillHole(const FeatureMap& payload, HolePolicy holes, FeatureMap& output,
              int y, int x) {
  const bool uniform = holes == HolePolicy::kUniform &&
                       payload.semantics() == ChannelSemantics::kClassProb;
  for (int c = 0; c < payload.channels(); ++c) {
    output.at(c, y, x) =
        uniform ? 1.0 / payload.channels() : payload.at(c, y, x);
  }
}

}  // namespace

const char* ToString(WarpDomain domain) {
  switch (domain) {
    case WarpDomain::kImage:
      return "image";
    case WarpDomain::kSegmentation:
      return "segmentation";
    case WarpDomain::kFeature:
      return "feature";
  }
  return "unknown";
}

SplatSums SplatSum(const FeatureMap& payload, const FlowField& flow,
                   const Plane<double>& weight) {
  CheckDims(payload, flow, "SplatSum");
  if (!(weight.dims() == payload.dims())) {
    throw InvalidArgumentError("SplatSum: weight dims mismatch");
  }
  for (double w : weight.values()) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgumentError("SplatSum: weights must be finite and >= 0");
    }
  }
  const Dims& dims = payload.dims();
  SplatSums sums{FeatureMap(payload.channels(), dims, payload.semantics(),
                            payload.timestamp()),
                 Plane<double>(dims, 0.0)};
  // Workers own disjoint bands of target rows and each walks every source in
  // row-major order, so per-target summation order matches the sequential
  // reference exactly.
  ParallelFor(dims.height, [&](int row_begin, int row_end) {
    for (int sy = 0; sy < dims.height; ++sy) {
      for (int sx = 0; sx < dims.width; ++sx) {
        const Landing land(sx, sy, flow.u.at(sy, sx), flow.v.at(sy, sx));
        if (land.y0 + 1 < row_begin || land.y0 >= row_end) continue;
        const double w = weight.at(sy, sx);
        for (int j = 0; j <= 1; ++j) {
          const int ny = land.y0 + j;
          if (ny < row_begin || ny >= row_end) continue;
          const double ky = Tent(land.y - ny);
          for (int i = 0; i <= 1; ++i) {
            const int nx = land.x0 + i;
            if (!dims.contains(nx, ny)) continue;
            const double k = Tent(land.x - nx) * ky;
            if (k == 0.0) continue;
            const double wk = w * k;
            sums.denominator.at(ny, nx) += wk;
            for (int c = 0; c < payload.channels(); ++c) {
              sums.numerator.at(c, ny, nx) += wk * payload.at(c, sy, sx);
            }
          }
        }
      }
    }
  });
  return sums;
}

SplatResult SoftmaxSplat(const FeatureMap& payload, const FlowField& flow,
                         const ConfidenceMap& confidence, HolePolicy holes) {
  CheckDims(payload, flow, "SoftmaxSplat");
  if (!(confidence.dims() == payload.dims())) {
    throw InvalidArgumentError("SoftmaxSplat: confidence dims mismatch");
  }
  const Dims& dims = payload.dims();
  Plane<double> weight(dims);
  const std::vector<double> w = ExpShiftedConfidence(confidence);
  std::copy(w.begin(), w.end(), weight.values().begin());

  SplatSums sums = SplatSum(payload, flow, weight);
  SplatResult result{std::move(sums.numerator), std::move(sums.denominator),
                     FeatureMap(payload.channels(), dims, payload.semantics(),
                                payload.timestamp()),
                     Mask(dims, 0)};
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const double den = result.denominator.at(y, x);
      if (den > kCoverageEpsilon) {
        result.coverage.at(y, x) = 1;
        for (int c = 0; c < payload.channels(); ++c) {
          result.output.at(c, y, x) = result.numerator.at(c, y, x) / den;
        }
      } else {
        FillHole(payload, holes, result.output, y, x);
      }
    }
  }
  return result;
}

SplatGradients SoftmaxSplatGradients(const FeatureMap& payload,
                                     const FlowField& flow,
                                     const ConfidenceMap& confidence,
                                     const FeatureMap& upstream,
                                     HolePolicy holes) {
  if (upstream.channels() != payload.channels() ||
      !(upstream.dims() == payload.dims())) {
    throw InvalidArgumentError("SoftmaxSplatGradients: upstream shape mismatch");
  }
  const SplatResult fwd = SoftmaxSplat(payload, flow, confidence, holes);
  const Dims& dims = payload.dims();
  const int channels = payload.channels();
  const std::vector<double> w = ExpShiftedConfidence(confidence);

  // Gradients with respect to numerator and denominator at each target.
  FeatureMap g_num(channels, dims, ChannelSemantics::kGeneric);
  Plane<double> g_den(dims, 0.0);
  SplatGradients grads{FeatureMap(channels, dims, payload.semantics(),
                                  payload.timestamp()),
                       Plane<double>(dims, 0.0), FlowField(dims)};
  const bool copy_holes = !(holes == HolePolicy::kUniform &&
                            payload.semantics() == ChannelSemantics::kClassProb);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      if (!fwd.coverage.at(y, x)) {
        if (copy_holes) {
          for (int c = 0; c < channels; ++c) {
            grads.d_payload.at(c, y, x) += upstream.at(c, y, x);
          }
        }
        continue;
      }
      const double den = fwd.denominator.at(y, x);
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        g_num.at(c, y, x) = upstream.at(c, y, x) / den;
        acc += upstream.at(c, y, x) * fwd.output.at(c, y, x);
      }
      g_den.at(y, x) = -acc / den;
    }
  }

  for (int sy = 0; sy < dims.height; ++sy) {
    for (int sx = 0; sx < dims.width; ++sx) {
      const Landing land(sx, sy, flow.u.at(sy, sx), flow.v.at(sy, sx));
      const double wq = w[static_cast<std::size_t>(sy) * dims.width + sx];
      double d_w = 0.0;
      double d_u = 0.0;
      double d_v = 0.0;
      for (int j = 0; j <= 1; ++j) {
        const int ny = land.y0 + j;
        const double ky = Tent(land.y - ny);
        const double sign_y = j == 0 ? -1.0 : 1.0;
        for (int i = 0; i <= 1; ++i) {
          const int nx = land.x0 + i;
          if (!dims.contains(nx, ny) || !fwd.coverage.at(ny, nx)) continue;
          const double kx = Tent(land.x - nx);
          const double sign_x = i == 0 ? -1.0 : 1.0;
          const double k = kx * ky;
          double a = g_den.at(ny, nx);
          for (int c = 0; c < channels; ++c) {
            a += payload.at(c, sy, sx) * g_num.at(c, ny, nx);
            grads.d_payload.at(c, sy, sx) += wq * k * g_num.at(c, ny, nx);
          }
          d_w += k * a;
          const double d_k = wq * a;
          d_u += d_k * ky * sign_x;
          d_v += d_k * kx * sign_y;
        }
      }
      grads.d_confidence.at(sy, sx) = wq * d_w;
      grads.d_flow.u.at(sy, sx) = d_u;
      grads.d_flow.v.at(sy, sx) = d_v;
    }
  }
  return grads;
}

FeatureMap BackwardWarp(const FeatureMap& payload, const FlowField& flow) {
  CheckDims(payload, flow, "BackwardWarp");
  const Dims& dims = payload.dims();
  FeatureMap out(payload.channels(), dims, payload.semantics(),
                 payload.timestamp());
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const double sx =
          std::clamp(x + flow.u.at(y, x), 0.0, dims.width - 1.0);
      const double sy =
          std::clamp(y + flow.v.at(y, x), 0.0, dims.height - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, dims.width - 1);
      const int y1 = std::min(y0 + 1, dims.height - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < payload.channels(); ++c) {
        const double top = payload.at(c, y0, x0) +
                           fx * (payload.at(c, y0, x1) - payload.at(c, y0, x0));
        const double bottom =
            payload.at(c, y1, x0) +
            fx * (payload.at(c, y1, x1) - payload.at(c, y1, x0));
        out.at(c, y, x) = top + fy * (bottom - top);
      }
    }
  }
  return out;
}

FeatureMap Refine(const FeatureMap& feature, int passes, const Mask* coverage) {
  if (passes < 0) throw InvalidArgumentError("Refine: passes must be >= 0");
  const Dims& dims = feature.dims();
  if (coverage != nullptr && !(coverage->dims() == dims)) {
    throw InvalidArgumentError("Refine: coverage dims mismatch");
  }
  const bool class_prob = feature.semantics() == ChannelSemantics::kClassProb;
  const int channels = feature.channels();
  auto covered = [&](int y, int x) {
    return coverage == nullptr || coverage->at(y, x) != 0;
  };

  FeatureMap current = feature;
  for (int pass = 0; pass < passes; ++pass) {
    Plane<int> labels(dims, 0);
    if (class_prob) {
      for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
          labels.at(y, x) = ArgmaxChannel(current, y, x);
        }
      }
    }
    FeatureMap next = current;
    ParallelFor(dims.height, [&](int row_begin, int row_end) {
      std::vector<double> dev(channels);
      for (int y = row_begin; y < row_end; ++y) {
        for (int x = 0; x < dims.width; ++x) {
          const bool self_covered = covered(y, x);
          std::fill(dev.begin(), dev.end(), 0.0);
          int count = 0;
          for (int j = -1; j <= 1; ++j) {
            for (int i = -1; i <= 1; ++i) {
              const int yy = y + j;
              const int xx = x + i;
              if (!dims.contains(xx, yy) || !covered(yy, xx)) continue;
              if (class_prob && self_covered &&
                  labels.at(yy, xx) != labels.at(y, x)) {
                continue;
              }
              for (int c = 0; c < channels; ++c) {
                dev[c] += current.at(c, yy, xx) - current.at(c, y, x);
              }
              ++count;
            }
          }
          if (count == 0) continue;
          for (int c = 0; c < channels; ++c) {
            next.at(c, y, x) = current.at(c, y, x) + dev[c] / count;
          }
          bool changed = false;
          for (int c = 0; c < channels; ++c) changed = changed || dev[c] != 0.0;
          if (class_prob && changed) {
            double sum = 0.0;
            for (int c = 0; c < channels; ++c) sum += next.at(c, y, x);
            if (sum > 0.0 && sum != 1.0) {
              for (int c = 0; c < channels; ++c) next.at(c, y, x) /= sum;
            }
          }
        }
      }
    });
    current = std::move(next);
  }
  return current;
}

DomainWarpResult WarpInDomain(WarpDomain domain, const FeatureMap& payload,
                              const FlowField& flow,
                              const ConfidenceMap& confidence) {
  const Dims& dims = payload.dims();
  switch (domain) {
    case WarpDomain::kImage:
      if (payload.channels() != 1) {
        throw InvalidArgumentError(
            "image-domain warping expects a 1-channel intensity payload");
      }
      break;
    case WarpDomain::kSegmentation:
      for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
          int ones = 0;
          for (int c = 0; c < payload.channels(); ++c) {
            const double v = payload.at(c, y, x);
            if (v == 1.0) {
              ++ones;
            } else if (v != 0.0) {
              ones = -1;
              break;
            }
          }
          if (ones != 1) {
            throw InvalidArgumentError(
                "segmentation-domain warping expects a one-hot payload");
          }
        }
      }
      break;
    case WarpDomain::kFeature:
      break;
  }
  SplatResult splat = SoftmaxSplat(payload, flow, confidence);
  DomainWarpResult result{std::move(splat.output), std::move(splat.coverage)};
  if (domain == WarpDomain::kSegmentation) {
    FeatureMap& out = result.payload;
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        const int label = ArgmaxChannel(out, y, x);
        for (int c = 0; c < out.channels(); ++c) {
          out.at(c, y, x) = c == label ? 1.0 : 0.0;
        }
      }
    }
  }
  return result;
}

void WriteFeatureMap(const FeatureMap& feature,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  out.write("FTR1", 4);
  internal::WriteLe<std::uint16_t>(out, feature.channels());
  internal::WriteLe<std::uint16_t>(out, feature.dims().height);
  internal::WriteLe<std::uint16_t>(out, feature.dims().width);
  for (double v : feature.values()) {
    internal::WriteLe<float>(out, static_cast<float>(v));
  }
}

FeatureMap ReadFeatureMap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  internal::ExpectMagic(in, "FTR1");
  const int channels = internal::ReadLe<std::uint16_t>(in, "channels");
  Dims dims;
  dims.height = internal::ReadLe<std::uint16_t>(in, "height");
  dims.width = internal::ReadLe<std::uint16_t>(in, "width");
  FeatureMap feature(channels, dims, ChannelSemantics::kGeneric);
  for (double& v : feature.values()) v = internal::ReadLe<float>(in, "value");
  return feature;
}

}  // namespace anyprop
