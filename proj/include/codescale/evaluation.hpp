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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "codescale/corpus.hpp"
#include "codescale/model.hpp"
#include "codescale/tokenizer.hpp"
#include "codescale/training.hpp"

namespace codescale {

/// Mask seed of one test sequence: a function of the evaluation seed and the
/// sequence content, so the masks do not depend on test-set order.
uint64_t sequence_mask_seed(uint64_t seed, const Sequence& sequence);

/// Pooled masked-token loss over a test set: each sequence is masked once,
/// run through the encoder, and its -log p terms are summed. Per-sequence
/// partial sums are reduced in content-hash order, which makes the result
/// bit-identical under any permutation of `tests`.
MlmLoss test_loss(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> tests,
                  const SpecialIds& special, double mask_rate, uint64_t seed);

/// Mean -log p per masked token over the whole set.
double test_error(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> tests,
                  const SpecialIds& special, double mask_rate, uint64_t seed);

/// Distribution of test error over repeated (subset, mask) draws at one size.
struct EvalReport {
  size_t test_size = 0;
  size_t trials = 0;
  std::vector<double> trial_errors;
  std::vector<uint64_t> seeds;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation across trials
  double min_error = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max_error = 0.0;
};

/// Summary statistics of `values` (quartiles by linear interpolation).
EvalReport summarize_trials(size_t test_size, std::vector<double> values, std::vector<uint64_t> seeds);

/// One report per size. Trial t at size n draws an n-subset of `pool`
/// without replacement and a fresh mask realization, both from
/// mix_seed(seed, n, t).
std::vector<EvalReport> repeated_eval(const EncoderConfig& config, const ParameterSet& params,
                                      std::span<const Sequence> pool, std::span<const size_t> sizes, size_t trials,
                                      const SpecialIds& special, double mask_rate, uint64_t seed);

/// Same as above with caller-chosen per-trial seeds (applied to every size).
std::vector<EvalReport> repeated_eval_seeds(const EncoderConfig& config, const ParameterSet& params,
                                            std::span<const Sequence> pool, std::span<const size_t> sizes,
                                            std::span<const uint64_t> trial_seeds, const SpecialIds& special,
                                            double mask_rate);

inline constexpr size_t kDefaultTrials = 50;
inline const std::vector<size_t> kDefaultEvalSizes = {100, 1000, 10000};

/// CSV rows "trial,size,error" for every report.
std::string eval_reports_csv(std::span<const EvalReport> reports);
nlohmann::json eval_reports_json(std::span<const EvalReport> reports);

/// Training compute: FLOPs = 6 * total parameters * tokens seen.
struct ComputeLedger {
  uint64_t iterations = 0;
  uint64_t tokens_seen = 0;
  uint64_t total_params = 0;
  uint64_t non_embedding_params = 0;
  double flops = 0.0;
};

double flops_estimate(uint64_t total_params, double tokens);
double flops_estimate(const EncoderConfig& config, double tokens);
ComputeLedger compute_ledger(const EncoderConfig& config, uint64_t iterations, uint64_t batch_size,
                             uint64_t sequence_length);

void to_json(nlohmann::json& j, const ComputeLedger& ledger);
void from_json(const nlohmann::json& j, ComputeLedger& ledger);

}  // namespace codescale
