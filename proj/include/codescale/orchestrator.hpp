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
#include <string>
#include <vector>

#include <json.hpp>

#include "codescale/model.hpp"
#include "codescale/scaling.hpp"
#include "codescale/training.hpp"

namespace codescale {

/// One-dimension-at-a-time sweep.
///
/// data     one training corpus per level (`train_corpora`), same model and
///          schedule; x is the number of training tokens (non-pad).
/// model    one config per level (`models`), same corpus and schedule; x is the
///          total parameter count.
/// compute  one long run of max(levels) steps, checkpointed at every level;
///          x is training FLOPs at that step.
///
/// Every level shares the tokenizer, the held-out evaluation set and all seeds.
struct SweepSpec {
  ScaleDimension dimension = ScaleDimension::kData;
  std::vector<uint64_t> levels;          // compute: step counts
  EncoderConfig model;                   // data and compute sweeps
  std::vector<EncoderConfig> models;     // model sweep
  std::vector<std::string> model_names;  // labels for `models`
  TrainConfig train;
  std::vector<std::filesystem::path> train_corpora;  // data: one per level; otherwise one
  std::filesystem::path test_corpus;
  std::filesystem::path tokenizer;  // trained on the first corpus when absent
  size_t tokenizer_vocab = 512;     // used only when training the tokenizer
  size_t min_keep = 8;
  uint64_t checkpoint_every = 0;  // periodic checkpoints for resuming data/model runs
  size_t eval_sequences = 0;  // 0 keeps the whole chunked test set
  uint64_t eval_seed = 0;
  size_t eval_trials = 0;     // extra repeated evaluations per level (0 disables)
  size_t eval_trial_size = 0;
  std::filesystem::path output;

  size_t level_count() const;
  /// Throws when fewer than 3 levels are configured or the level lists
  /// disagree with the dimension.
  void validate() const;
};

/// Reads a sweep spec. Relative paths resolve against `base_dir`. Models may
/// be given as preset names or config objects.
SweepSpec parse_sweep_spec(const nlohmann::json& j, const std::filesystem::path& base_dir);
SweepSpec load_sweep_spec(const std::filesystem::path& path);
nlohmann::json to_json(const SweepSpec& spec);

inline constexpr size_t kDefaultSweepLevels = 4;

/// Outcome of one level.
struct RunRecord {
  std::string run_id;
  size_t level = 0;
  std::string status;  // "complete" or "failed"
  std::string message;
  double x = 0.0;
  double test_error = 0.0;
  bool skipped = false;  // already complete before this invocation
};

/// Runs every level not already complete. Level failures are recorded in the
/// level's manifest and do not stop the sweep. Layout under `spec.output`:
///   sweep.json, tokenizer.bpe, eval_set.sha256,
///   runs/<run_id>/manifest.json, loss.csv, eval.json, final.ckpt
///   runs/long/step_<n>.ckpt   (compute sweeps)
std::vector<RunRecord> run_sweep(const SweepSpec& spec);

/// Completed runs of a sweep directory, in run-id order. Incomplete runs are
/// skipped with a warning; an unreadable manifest throws naming the run.
std::vector<RunSummary> collect_runs(const std::filesystem::path& sweep_dir);
std::vector<ScalePoint> collect(const std::filesystem::path& sweep_dir);

}  // namespace codescale
