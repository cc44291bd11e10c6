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

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace codescale {

enum class ScaleDimension { kData, kModel, kCompute };

std::string to_string(ScaleDimension dimension);
ScaleDimension parse_dimension(const std::string& text);

/// One (scale, test error) observation; both must be positive.
struct ScalePoint {
  double x = 0.0;
  double e = 0.0;
  ScaleDimension dimension = ScaleDimension::kData;
};

/// e = k * x^(-alpha), fitted by ordinary least squares on (log x, log e).
struct PowerLawFit {
  double alpha = 0.0;
  double k = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log e - fitted log e, in input order
  ScaleDimension dimension = ScaleDimension::kData;
};

/// Requires at least 3 points of a single dimension, all positive, with at
/// least two distinct x values.
PowerLawFit fit_power_law(std::span<const ScalePoint> points);

double predict(const PowerLawFit& fit, double x);

nlohmann::json to_json(const PowerLawFit& fit);

/// One completed run as seen by the report: what it trained on (keys are
/// opaque fingerprints per dimension), its scale value and its test error.
struct RunSummary {
  std::string run_id;
  std::string data_key;
  std::string model_key;
  std::string compute_key;
  double x = 0.0;
  double error = 0.0;
};

struct SweepReport {
  ScaleDimension dimension = ScaleDimension::kData;
  std::vector<ScalePoint> points;
  PowerLawFit fit;
  std::string csv;  // kind,x,e,log_x,log_e rows for points and fitted-line samples
  std::string svg;
};

/// Determines the swept dimension from the runs, fits the power law and
/// renders the table and plot. Throws naming the offending runs when more
/// than one dimension varies, and when fewer than 3 runs are given.
SweepReport sweep_report(std::span<const RunSummary> runs);

}  // namespace codescale
