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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codescale/checkpoint.hpp"
#include "codescale/corpus.hpp"
#include "codescale/model.hpp"
#include "codescale/tokenizer.hpp"

namespace codescale {

/// One sequence prepared for masked-token prediction.
struct MaskedSequence {
  std::vector<int32_t> input;      // ids with masked positions set to [MASK]
  std::vector<size_t> positions;   // masked positions, ascending
  std::vector<int32_t> targets;    // original ids at `positions`
  PadMask pad;

  bool operator==(const MaskedSequence&) const = default;
};

using MaskedBatch = std::vector<MaskedSequence>;

/// Masks each non-pad, non-special position independently with probability
/// `mask_rate`. When no position is drawn, a single maskable position is
/// chosen uniformly instead, so at least one target always exists. Throws when
/// nothing is maskable.
MaskedSequence apply_mask(std::span<const int32_t> ids, const PadMask& pad, const SpecialIds& special,
                          double mask_rate, uint64_t seed);
MaskedSequence apply_mask(const Sequence& sequence, const SpecialIds& special, double mask_rate, uint64_t seed);

struct MlmLoss {
  double sum = 0.0;   // sum over masked positions of -log p(target)
  size_t count = 0;   // masked positions
  double mean() const { return sum / static_cast<double>(count); }
};

/// Cross-entropy of the masked targets under softmax(logits). Throws when no
/// position is masked.
MlmLoss mlm_loss(const Matrix& logits, const MaskedSequence& masked);
inline MlmLoss mlm_loss(const ForwardTrace& trace, const MaskedSequence& masked) {
  return mlm_loss(trace.logits, masked);
}

/// Gradient of `weight * mean masked loss` with respect to the logits; all
/// zeros when no position is masked (the loss is then constant).
Matrix mlm_loss_grad(const Matrix& logits, const MaskedSequence& masked, double weight);

class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(uint64_t batch_id, const std::string& what) : Error(what), batch_id_(batch_id) {}
  uint64_t batch_id() const { return batch_id_; }

 private:
  uint64_t batch_id_;
};

struct BatchGradient {
  double loss_sum = 0.0;  // sum over sequences of their mean masked loss
  ParameterSet grads;     // gradient of loss_sum
};

/// Gradient of the summed per-sequence mean MLM loss over `batch`. Sequences
/// without masked positions contribute nothing. Throws
/// NonFiniteLossError tagged with `batch_id` when a loss is not finite.
BatchGradient mlm_gradients(const EncoderConfig& config, const ParameterSet& params, const MaskedBatch& batch,
                            uint64_t batch_id, std::span<const uint64_t> dropout_seeds = {});

struct TrainConfig {
  size_t batch_size = 16;   // sequences per optimizer step
  size_t accum_steps = 1;   // micro-batches per optimizer step
  double lr_peak = 2e-4;
  uint64_t warmup_steps = 10000;
  uint64_t total_steps = 100000;
  double mask_rate = 0.15;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Linear warmup from 0 to lr_peak over warmup_steps, then linear decay to 0
/// at total_steps.
double lr_at(const TrainConfig& config, uint64_t step);

/// Element-wise AdamW update with bias correction. `t` is the 1-based update
/// count. Decay is decoupled: p -= lr * weight_decay * p.
void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                  uint64_t t, double lr, double weight_decay, const TrainConfig& config);

/// One AdamW step over every tensor. Weight decay applies to matrices only;
/// biases and norm parameters are not decayed. Throws on non-finite grads.
void adamw_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, double lr,
                const TrainConfig& config);

struct LossRecord {
  uint64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  uint64_t tokens_seen = 0;
};

struct LossTrace {
  std::vector<LossRecord> records;

  std::string to_csv() const;
  static LossTrace from_csv(std::string_view text);
};

struct CheckpointPolicy {
  std::filesystem::path directory;     // empty disables checkpoint files
  uint64_t every = 0;                  // 0 disables periodic checkpoints
  std::vector<uint64_t> at_steps;      // extra steps to checkpoint
  bool keep_optimizer = true;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& directory, uint64_t step);

struct PretrainResult {
  ParameterSet params;
  LossTrace trace;
  std::vector<std::filesystem::path> checkpoints;
  AdamState optimizer;
};

/// Deterministic order in which training sequences are consumed: epoch e is a
/// seeded shuffle of all indices.
class DataOrder {
 public:
  DataOrder(size_t count, uint64_t seed) : count_(count), seed_(seed) {}
  size_t at(uint64_t global_index);

 private:
  size_t count_;
  uint64_t seed_;
  uint64_t epoch_ = UINT64_MAX;
  std::vector<size_t> order_;
};

using StepCallback = std::function<void(const LossRecord&, const ParameterSet&)>;

/// Runs total_steps optimizer steps. Each step consumes batch_size sequences
/// split into accum_steps equal micro-batches; the summed micro-batch
/// gradients are divided by batch_size before the update. Sequence g of the
/// stream is masked with seed mix(seed, g), so results do not depend on the
/// accumulation split. On a non-finite loss the last good state is written to
/// `<directory>/last_good.ckpt` (when a directory is set) and
/// NonFiniteLossError is thrown.
PretrainResult pretrain(const std::vector<Sequence>& train, const SpecialIds& special, const EncoderConfig& model,
                        const TrainConfig& config, const CheckpointPolicy& policy,
                        const std::optional<Checkpoint>& resume = std::nullopt, const StepCallback& on_step = {});

}  // namespace codescale
