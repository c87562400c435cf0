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
#include <fstream>
#include <limits>

#include "anyprop/parallel.h"
#include "anyprop/status.h"
#include "binary_io.h"

namespace anyprop {
namespace {

// Relative slack under which two correlation scores count as tied.
constexpr double kTieTolerance = 1e-12;

void CheckPair(const VoxelGrid& a, const VoxelGrid& b) {
  if (!(a.dims() == b.dims()) || a.bins() != b.bins()) {
    throw InvalidArgumentError("voxel grids differ in dims or bins: " +
                               ToString(a.dims()) + "/" +
                               std::to_string(a.bins()) + " vs " +
                               ToString(b.dims()) + "/" +
                               std::to_string(b.bins()));
  }
}

// Direct (non-integral-image) patch sums so identical patches score
// identically wherever they sit.
class PatchMatcher {
 public:
  PatchMatcher(const VoxelGrid& a, const VoxelGrid& b, int patch)
      : a_(a), b_(b), half_(patch / 2), norm_a_(Norms(a)), norm_b_(Norms(b)) {}

  double Score(int y, int x, int dy, int dx) const {
    const Dims& dims = a_.dims();
    const int ty = y + dy;
    const int tx = x + dx;
    if (!dims.contains(tx, ty)) return kOutOfBoundsScore;
    const double na = norm_a_.at(y, x);
    const double nb = norm_b_.at(ty, tx);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    for (int bin = 0; bin < a_.bins(); ++bin) {
      for (int j = -half_; j <= half_; ++j) {
        const int ya = y + j;
        const int yb = ty + j;
        if (ya < 0 || yb < 0 || ya >= dims.height || yb >= dims.height) continue;
        for (int i = -half_; i <= half_; ++i) {
          const int xa = x + i;
          const int xb = tx + i;
          if (xa < 0 || xb < 0 || xa >= dims.width || xb >= dims.width) continue;
          dot += a_.at(bin, ya, xa) * b_.at(bin, yb, xb);
        }
      }
    }
    return dot / (na * nb);
  }

 private:
  Plane<double> Norms(const VoxelGrid& g) const {
    const Dims& dims = g.dims();
    Plane<double> norms(dims, 0.0);
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        double energy = 0.0;
        for (int bin = 0; bin < g.bins(); ++bin) {
          for (int j = -half_; j <= half_; ++j) {
            const int yy = y + j;
            if (yy < 0 || yy >= dims.height) continue;
            for (int i = -half_; i <= half_; ++i) {
              const int xx = x + i;
              if (xx < 0 || xx >= dims.width) continue;
              const double v = g.at(bin, yy, xx);
              energy += v * v;
            }
          }
        }
        norms.at(y, x) = std::sqrt(energy);
      }
    }
    return norms;
  }

  const VoxelGrid& a_;
  const VoxelGrid& b_;
  int half_;
  Plane<double> norm_a_;
  Plane<double> norm_b_;
};

bool IsTie(double score, double best) {
  return std::abs(score - best) <= kTieTolerance * std::max(1.0, std::abs(best));
}

// Replaces `best` when `score` is clearly higher, or tied and closer to the
// preferred point. Candidates arrive in row-major order, which settles the
// remaining ties.
struct BestOffset {
  double score = -std::numeric_limits<double>::infinity();
  int dy = 0;
  int dx = 0;
  double dist2 = std::numeric_limits<double>::infinity();
  bool seen = false;

  void Offer(double s, int cand_dy, int cand_dx, double pref_y, double pref_x) {
    const double d2 = (cand_dy - pref_y) * (cand_dy - pref_y) +
                      (cand_dx - pref_x) * (cand_dx - pref_x);
    if (!seen) {
      seen = true;
      score = s;
      dy = cand_dy;
      dx = cand_dx;
      dist2 = d2;
      return;
    }
    if (IsTie(s, score)) {
      if (d2 < dist2) {
        score = std::max(score, s);
        dy = cand_dy;
        dx = cand_dx;
        dist2 = d2;
      }
      return;
    }
    if (s > score) {
      score = s;
      dy = cand_dy;
      dx = cand_dx;
      dist2 = d2;
    }
  }
};

// Mean of `values` over masked 3x3 neighbors, written as center plus mean
// deviation so a locally constant field stays bit-exact.
double MaskedMean(const Plane<double>& values, const Mask& mask, int y, int x) {
  const Dims& dims = values.dims();
  const double center = values.at(y, x);
  double dev = 0.0;
  int count = 0;
  for (int j = -1; j <= 1; ++j) {
    for (int i = -1; i <= 1; ++i) {
      const int yy = y + j;
      const int xx = x + i;
      if (!dims.contains(xx, yy) || !mask.at(yy, xx)) continue;
      dev += values.at(yy, xx) - center;
      ++count;
    }
  }
  return count == 0 ? center : center + dev / count;
}

// Fills unmasked pixels wave by wave from already-filled 8-neighbors.
void DiffusionFill(FlowField& flow, Mask filled) {
  const Dims& dims = flow.dims();
  bool any = false;
  for (std::uint8_t m : filled.values()) any = any || m;
  if (!any) {
    flow = FlowField(dims);
    return;
  }
  while (true) {
    Mask next = filled;
    FlowField updated = flow;
    bool changed = false;
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        if (filled.at(y, x)) continue;
        double su = 0.0;
        double sv = 0.0;
        int count = 0;
        for (int j = -1; j <= 1; ++j) {
          for (int i = -1; i <= 1; ++i) {
            const int yy = y + j;
            const int xx = x + i;
            if (!dims.contains(xx, yy) || !filled.at(yy, xx)) continue;
            su += flow.u.at(yy, xx);
            sv += flow.v.at(yy, xx);
            ++count;
          }
        }
        if (count == 0) continue;
        updated.u.at(y, x) = su / count;
        updated.v.at(y, x) = sv / count;
        next.at(y, x) = 1;
        changed = true;
      }
    }
    flow = std::move(updated);
    filled = std::move(next);
    if (!changed) break;
  }
}

}  // namespace

CorrelationVolume::CorrelationVolume(Dims dims, int radius)
    : dims_(dims),
      radius_(radius),
      scores_(dims.area() * static_cast<std::size_t>(2 * radius + 1) *
                  static_cast<std::size_t>(2 * radius + 1),
              0.0) {}

std::pair<int, int> CorrelationVolume::Argmax(int y, int x) const {
  BestOffset best;
  for (int dy = -radius_; dy <= radius_; ++dy) {
    for (int dx = -radius_; dx <= radius_; ++dx) {
      best.Offer(at(y, x, dy, dx), dy, dx, 0.0, 0.0);
    }
  }
  return {best.dy, best.dx};
}

CorrelationVolume BuildCorrelation(const VoxelGrid& a, const VoxelGrid& b,
                                   int radius, int patch) {
  CheckPair(a, b);
  if (radius < 1) throw InvalidArgumentError("correlation radius must be >= 1");
  if (patch < 1 || patch % 2 == 0) {
    throw InvalidArgumentError("patch size must be odd and >= 1");
  }
  const PatchMatcher matcher(a, b, patch);
  CorrelationVolume volume(a.dims(), radius);
  const Dims& dims = a.dims();
  ParallelFor(dims.height, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            volume.at(y, x, dy, dx) = matcher.Score(y, x, dy, dx);
          }
        }
      }
    }
  });
  return volume;
}

FlowField EstimateFlow(const VoxelGrid& a, const VoxelGrid& b,
                       const FlowParams& params) {
  CheckPair(a, b);
  if (params.iterations < 1) {
    throw InvalidArgumentError("flow iterations must be >= 1");
  }
  if (params.radius < 1) throw InvalidArgumentError("flow radius must be >= 1");
  if (params.patch < 1 || params.patch % 2 == 0) {
    throw InvalidArgumentError("patch size must be odd and >= 1");
  }
  if (params.smooth_passes < 0) {
    throw InvalidArgumentError("smooth_passes must be >= 0");
  }
  const Dims& dims = a.dims();
  const double bound =
      std::min(params.max_displacement,
               static_cast<double>(params.radius) * params.iterations);
  const int int_bound = static_cast<int>(std::floor(bound));

  const Plane<double> energy = a.AbsEnergy();
  Mask active(dims, 0);
  for (std::size_t i = 0; i < dims.area(); ++i) active[i] = energy[i] > 0.0;

  const PatchMatcher matcher(a, b, params.patch);
  FlowField flow(dims);

  auto lookup = [&](int y, int x, double du, double dv) {
    // Bilinear interpolation of the score surface at a fractional offset.
    const int x0 = static_cast<int>(std::floor(du));
    const int y0 = static_cast<int>(std::floor(dv));
    const double fx = du - x0;
    const double fy = dv - y0;
    double acc = 0.0;
    for (int j = 0; j <= 1; ++j) {
      for (int i = 0; i <= 1; ++i) {
        const double w = (i ? fx : 1.0 - fx) * (j ? fy : 1.0 - fy);
        if (w == 0.0) continue;
        const double s = matcher.Score(y, x, y0 + j, x0 + i);
        if (s == kOutOfBoundsScore) return kOutOfBoundsScore;
        acc += w * s;
      }
    }
    return acc;
  };

  for (int iter = 0; iter < params.iterations; ++iter) {
    FlowField next = flow;
    ParallelFor(dims.height, [&](int row_begin, int row_end) {
      for (int y = row_begin; y < row_end; ++y) {
        for (int x = 0; x < dims.width; ++x) {
          if (!active.at(y, x)) continue;
          const double du = flow.u.at(y, x);
          const double dv = flow.v.at(y, x);
          const int cx = static_cast<int>(std::lround(du));
          const int cy = static_cast<int>(std::lround(dv));
          BestOffset best;
          for (int oy = cy - params.radius; oy <= cy + params.radius; ++oy) {
            if (std::abs(oy) > int_bound) continue;
            for (int ox = cx - params.radius; ox <= cx + params.radius; ++ox) {
              if (std::abs(ox) > int_bound) continue;
              best.Offer(matcher.Score(y, x, oy, ox), oy, ox, dv, du);
            }
          }
          if (best.score > lookup(y, x, du, dv)) {
            next.u.at(y, x) = best.dx;
            next.v.at(y, x) = best.dy;
          }
        }
      }
    });
    for (int pass = 0; pass < params.smooth_passes; ++pass) {
      FlowField smoothed = next;
      for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
          if (!active.at(y, x)) continue;
          smoothed.u.at(y, x) = MaskedMean(next.u, active, y, x);
          smoothed.v.at(y, x) = MaskedMean(next.v, active, y, x);
        }
      }
      next = std::move(smoothed);
    }
    for (std::size_t i = 0; i < dims.area(); ++i) {
      next.u[i] = std::clamp(next.u[i], -bound, bound);
      next.v[i] = std::clamp(next.v[i], -bound, bound);
    }
    flow = std::move(next);
  }
  DiffusionFill(flow, active);
  return flow;
}

ConfidenceMap ConsensusConfidence(const VoxelGrid& voxel, const FlowField& flow,
                                  const ConfidenceParams& params) {
  if (!(voxel.dims() == flow.dims())) {
    throw InvalidArgumentError("ConsensusConfidence: dims mismatch");
  }
  if (params.s_min > params.s_max) {
    throw InvalidArgumentError("ConsensusConfidence: s_min > s_max");
  }
  const Dims& dims = voxel.dims();
  const Plane<double> energy = voxel.AbsEnergy();
  const int r = std::max(0, params.density_radius);

  Plane<double> density(dims, 0.0);
  double max_density = 0.0;
  Plane<double> tv(dims, 0.0);
  double max_tv = 0.0;
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      double e = 0.0;
      for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
          if (dims.contains(x + i, y + j)) e += energy.at(y + j, x + i);
        }
      }
      density.at(y, x) = e;
      max_density = std::max(max_density, e);

      double variation = 0.0;
      int count = 0;
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          if ((i == 0 && j == 0) || !dims.contains(x + i, y + j)) continue;
          variation += std::abs(flow.u.at(y, x) - flow.u.at(y + j, x + i)) +
                       std::abs(flow.v.at(y, x) - flow.v.at(y + j, x + i));
          ++count;
        }
      }
      tv.at(y, x) = count > 0 ? variation / count : 0.0;
      max_tv = std::max(max_tv, tv.at(y, x));
    }
  }

  ConfidenceMap conf(dims, params.s_min);
  for (std::size_t i = 0; i < dims.area(); ++i) {
    if (density[i] == 0.0) continue;
    const double dens = density[i] / max_density;
    const double consistency = max_tv > 0.0 ? 1.0 - tv[i] / max_tv : 1.0;
    conf.s[i] = std::clamp(params.alpha * dens + params.beta * consistency,
                           params.s_min, params.s_max);
  }
  return conf;
}

namespace {

void WriteHeader(std::ostream& out, const char* magic, const Dims& dims) {
  out.write(magic, 4);
  internal::WriteLe<std::uint16_t>(out, static_cast<std::uint16_t>(dims.height));
  internal::WriteLe<std::uint16_t>(out, static_cast<std::uint16_t>(dims.width));
}

Dims ReadHeader(std::istream& in, const char* magic) {
  internal::ExpectMagic(in, magic);
  Dims dims;
  dims.height = internal::ReadLe<std::uint16_t>(in, "height");
  dims.width = internal::ReadLe<std::uint16_t>(in, "width");
  return dims;
}

}  // namespace

void WriteFlow(const FlowField& flow, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  WriteHeader(out, "FLW1", flow.dims());
  for (std::size_t i = 0; i < flow.dims().area(); ++i) {
    internal::WriteLe<float>(out, static_cast<float>(flow.u[i]));
    internal::WriteLe<float>(out, static_cast<float>(flow.v[i]));
  }
}

FlowField ReadFlow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  FlowField flow(ReadHeader(in, "FLW1"));
  for (std::size_t i = 0; i < flow.dims().area(); ++i) {
    flow.u[i] = internal::ReadLe<float>(in, "u");
    flow.v[i] = internal::ReadLe<float>(in, "v");
  }
  return flow;
}

void WriteConfidence(const ConfidenceMap& conf,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  WriteHeader(out, "CNF1", conf.dims());
  for (double s : conf.s.values()) {
    internal::WriteLe<float>(out, static_cast<float>(s));
  }
}

ConfidenceMap ReadConfidence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  ConfidenceMap conf(ReadHeader(in, "CNF1"));
  for (double& s : conf.s.values()) s = internal::ReadLe<float>(in, "s");
  return conf;
}

}  // namespace anyprop
