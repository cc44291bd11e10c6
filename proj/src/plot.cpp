// Copyright 2026 The Codescale Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codescale/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "codescale/common.hpp"

namespace codescale {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

SvgPlot& SvgPlot::add(Series series) {
  if (series.x.size() != series.y.size()) throw Error("SvgPlot: x and y lengths differ");
  series_.push_back(std::move(series));
  return *this;
}

std::string SvgPlot::render(int width, int height) const {
  auto tx = [&](double v) { return log_x_ ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y_ ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series_) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad_y = 0.05 * (y1 - y0);
  y0 -= pad_y;
  y1 += pad_y;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title_) +
         "</text>\n";
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double vx = log_x_ ? std::pow(10.0, fx) : fx;
    const double vy = log_y_ ? std::pow(10.0, fy) : fy;
    const double sx = left + pw * i / 4.0;
    const double sy = top + ph * (1.0 - i / 4.0);
    svg += "<line x1=\"" + num(sx) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(sx) + "\" y2=\"" + num(top + ph + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(sx) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(vx) +
           "</text>\n";
    svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(sy) + "\" x2=\"" + num(left) + "\" y2=\"" + num(sy) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(sy + 4) + "\" text-anchor=\"end\">" + tick_label(vy) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 12.0) + "\" text-anchor=\"middle\">" +
         escape(x_label_ + (log_x_ ? " (log)" : "")) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(top + ph / 2) + ")\">" + escape(y_label_ + (log_y_ ? " (log)" : "")) + "</text>\n";

  double legend_y = top + 14;
  for (const auto& s : series_) {
    if (s.line) {
      std::string pts;
      for (size_t i = 0; i < s.x.size(); ++i) pts += (i ? " " : "") + num(px(s.x[i])) + "," + num(py(s.y[i]));
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"/>\n";
    } else {
      for (size_t i = 0; i < s.x.size(); ++i) {
        svg += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"4\" fill=\"" + s.color +
               "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      svg += "<text x=\"" + num(left + pw - 8) + "\" y=\"" + num(legend_y) + "\" text-anchor=\"end\" fill=\"" + s.color +
             "\">" + escape(s.label) + "</text>\n";
      legend_y += 16;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace codescale
