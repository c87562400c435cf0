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

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "anyprop/bench.h"

namespace anyprop {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#ff7f0e", "#9467bd", "#8c564b"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string ReportSvg(const BenchReport& report, const std::string& title) {
  std::vector<std::string> variants;
  TimeUs dt_min = 0;
  TimeUs dt_max = 0;
  for (const BenchRow& row : report.rows) {
    if (std::find(variants.begin(), variants.end(), row.variant) == variants.end()) {
      variants.push_back(row.variant);
    }
    if (&row == &report.rows.front() || row.dt < dt_min) dt_min = row.dt;
    dt_max = std::max(dt_max, row.dt);
  }
  const double span = dt_max > dt_min ? static_cast<double>(dt_max - dt_min) : 1.0;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto px = [&](TimeUs dt) {
    return dt_max > dt_min
               ? kMargin + plot_w * static_cast<double>(dt - dt_min) / span
               : kMargin + plot_w / 2;
  };
  auto py = [&](double miou) { return kMargin + plot_h * (1.0 - miou); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << Num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\">"
      << Escape(title) << "</text>\n"
      << "<line x1=\"" << Num(kMargin) << "\" y1=\"" << Num(kHeight - kMargin)
      << "\" x2=\"" << Num(kWidth - kMargin) << "\" y2=\"" << Num(kHeight - kMargin)
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << Num(kMargin) << "\" y1=\"" << Num(kMargin) << "\" x2=\""
      << Num(kMargin) << "\" y2=\"" << Num(kHeight - kMargin)
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double m = tick / 4.0;
    svg << "<text x=\"" << Num(kMargin - 6) << "\" y=\"" << Num(py(m) + 4)
        << "\" text-anchor=\"end\">" << Num(m) << "</text>\n";
  }
  svg << "<text x=\"" << Num(kMargin) << "\" y=\"" << Num(kHeight - kMargin + 18)
      << "\">" << dt_min / 1000 << " ms</text>\n"
      << "<text x=\"" << Num(kWidth - kMargin) << "\" y=\""
      << Num(kHeight - kMargin + 18) << "\" text-anchor=\"end\">" << dt_max / 1000
      << " ms</text>\n";
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const BenchRow& row : report.Curve(variants[i])) {
      svg << (first ? "" : " ") << Num(px(row.dt)) << ',' << Num(py(row.iou.miou));
      first = false;
    }
    svg << "\"/>\n<text x=\"" << Num(kWidth - kMargin + 4) << "\" y=\""
        << Num(kMargin + 16.0 * static_cast<double>(i)) << "\" fill=\"" << color
        << "\">" << Escape(variants[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace anyprop
