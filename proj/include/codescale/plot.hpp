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

#pragma once

#include <string>
#include <vector>

namespace codescale {

/// Minimal static SVG line/scatter plot. Output is a pure function of the
/// inputs (no timestamps, fixed number formatting).
class SvgPlot {
 public:
  struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool line = false;      // polyline instead of markers
    std::string color = "#1f77b4";
  };

  SvgPlot(std::string title, std::string x_label, std::string y_label);

  SvgPlot& log_x(bool on = true) { log_x_ = on; return *this; }
  SvgPlot& log_y(bool on = true) { log_y_ = on; return *this; }
  SvgPlot& add(Series series);

  std::string render(int width = 640, int height = 420) const;

 private:
  std::string title_, x_label_, y_label_;
  bool log_x_ = false, log_y_ = false;
  std::vector<Series> series_;
};

}  // namespace codescale
