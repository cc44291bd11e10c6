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

#include "codescale/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "codescale/common.hpp"
#include "codescale/plot.hpp"

namespace codescale {

std::string to_string(ScaleDimension dimension) {
  switch (dimension) {
    case ScaleDimension::kData: return "data";
    case ScaleDimension::kModel: return "model";
    case ScaleDimension::kCompute: return "compute";
  }
  return "?";
}

ScaleDimension parse_dimension(const std::string& text) {
  if (text == "data") return ScaleDimension::kData;
  if (text == "model") return ScaleDimension::kModel;
  if (text == "compute") return ScaleDimension::kCompute;
  throw Error("dimension must be data, model or compute; got '" + text + "'");
}

PowerLawFit fit_power_law(std::span<const ScalePoint> points) {
  if (points.size() < 3) throw Error("fit_power_law: need at least 3 points, got " + std::to_string(points.size()));
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !(p.e > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.e)) {
      throw Error("fit_power_law: scale and error values must be positive and finite");
    }
    if (p.dimension != points.front().dimension) throw Error("fit_power_law: points mix dimensions");
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(p.x);
    my += std::log(p.e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    const double dy = std::log(p.e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw Error("fit_power_law: all x values are equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  PowerLawFit fit;
  fit.dimension = points.front().dimension;
  fit.alpha = -slope;
  fit.k = std::exp(intercept);
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.e) - (intercept + slope * std::log(p.x));
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  // A flat response has nothing left to explain: the fit is exact.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

double predict(const PowerLawFit& fit, double x) {
  if (!(x > 0.0)) throw Error("predict: scale must be positive");
  return fit.k * std::pow(x, -fit.alpha);
}

nlohmann::json to_json(const PowerLawFit& fit) {
  return {{"dimension", to_string(fit.dimension)}, {"alpha", fit.alpha},          {"k", fit.k},
          {"r_squared", fit.r_squared},            {"residuals", fit.residuals}};
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SweepReport sweep_report(std::span<const RunSummary> runs) {
  if (runs.size() < 3) throw Error("sweep_report: need at least 3 completed runs, got " + std::to_string(runs.size()));

  struct Axis {
    ScaleDimension dim;
    std::string RunSummary::*key;
  };
  const Axis axes[] = {{ScaleDimension::kData, &RunSummary::data_key},
                       {ScaleDimension::kModel, &RunSummary::model_key},
                       {ScaleDimension::kCompute, &RunSummary::compute_key}};
  std::vector<ScaleDimension> varying;
  std::string offenders;
  for (const auto& axis : axes) {
    std::set<std::string> keys;
    std::vector<std::string> differ;
    for (const auto& r : runs) {
      keys.insert(r.*axis.key);
      if (r.*axis.key != runs.front().*axis.key) differ.push_back(r.run_id);
    }
    if (keys.size() > 1) {
      varying.push_back(axis.dim);
      offenders += " " + to_string(axis.dim) + ":";
      for (const auto& id : differ) offenders += " " + id;
    }
  }
  if (varying.size() > 1) {
    throw Error("sweep_report: runs vary in more than one dimension (relative to " + runs.front().run_id + ";" +
                offenders + ")");
  }
  if (varying.empty()) throw Error("sweep_report: runs do not vary in any dimension");

  SweepReport report;
  report.dimension = varying.front();
  for (const auto& r : runs) report.points.push_back({r.x, r.error, report.dimension});
  std::stable_sort(report.points.begin(), report.points.end(),
                   [](const ScalePoint& a, const ScalePoint& b) { return a.x < b.x; });
  report.fit = fit_power_law(report.points);

  std::string csv = "kind,x,e,log_x,log_e\n";
  SvgPlot::Series observed{"observed", {}, {}, false, "#1f77b4"};
  SvgPlot::Series fitted{"fit alpha=" + g17(report.fit.alpha).substr(0, 8), {}, {}, true, "#d62728"};
  for (const auto& p : report.points) {
    csv += "point," + g17(p.x) + "," + g17(p.e) + "," + g17(std::log(p.x)) + "," + g17(std::log(p.e)) + "\n";
    observed.x.push_back(p.x);
    observed.y.push_back(p.e);
  }
  const double lo = std::log(report.points.front().x);
  const double hi = std::log(report.points.back().x);
  constexpr int kSamples = 32;
  for (int i = 0; i < kSamples; ++i) {
    const double lx = lo + (hi - lo) * i / (kSamples - 1);
    const double x = std::exp(lx);
    const double e = predict(report.fit, x);
    csv += "fit," + g17(x) + "," + g17(e) + "," + g17(lx) + "," + g17(std::log(e)) + "\n";
    fitted.x.push_back(x);
    fitted.y.push_back(e);
  }
  report.csv = std::move(csv);
  SvgPlot plot("test error vs " + to_string(report.dimension) + " scale", to_string(report.dimension) + " scale",
               "test error");
  plot.log_x().log_y().add(std::move(observed)).add(std::move(fitted));
  report.svg = plot.render();
  return report;
}

}  // namespace codescale
