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

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "codescale/model.hpp"

namespace codescale {

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

/// First and second Adam moments plus the number of updates applied.
struct AdamState {
  ParameterSet m;
  ParameterSet v;
  uint64_t step = 0;

  static AdamState zeros(const EncoderConfig& config) { return {ParameterSet::zeros(config), ParameterSet::zeros(config), 0}; }
};

/// Position of the training data stream, enough to resume sampling exactly.
struct StreamState {
  uint64_t seed = 0;
  uint64_t sequences_consumed = 0;
};

struct Checkpoint {
  EncoderConfig config;
  ParameterSet params;
  uint64_t step = 0;
  StreamState stream;
  std::optional<AdamState> optimizer;
};

/// Binary layout: magic "CSCK", u32 format version, u64 header length, JSON
/// header (config, step, stream state, tensor table), then every tensor as
/// little-endian float64 in declaration order; the Adam moments follow in the
/// same order when present.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace codescale
