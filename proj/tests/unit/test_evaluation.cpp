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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "codescale/evaluation.hpp"
#include "codescale/training.hpp"
#include "test_util.hpp"

namespace codescale {
namespace {

using testing::random_sequences;

EncoderConfig small_model() { return make_config(1, 8, 2, 4, 30, 16, NormPlacement::kPre); }

TEST(TestErrorTest, ZeroHeadGivesLogVocab) {
  EncoderConfig c = small_model();
  c.tied_head = false;
  ParameterSet p = init_params(c, 3);
  p.head_weight.setZero();
  p.head_bias.setZero();
  const auto tests = random_sequences(20, 16, 30, 1);
  EXPECT_NEAR(test_error(c, p, tests, SpecialIds{}, 0.15, 4), std::log(30.0), 1e-3);
}

TEST(TestErrorTest, EqualsManualAggregation) {
  const EncoderConfig c = small_model();
  const ParameterSet p = init_params(c, 3);
  const auto tests = random_sequences(15, 16, 30, 2);
  double sum = 0.0;
  size_t count = 0;
  for (const auto& s : tests) {
    const MaskedSequence m = apply_mask(s, SpecialIds{}, 0.15, sequence_mask_seed(9, s));
    const MlmLoss l = mlm_loss(forward(c, p, m.input, m.pad), m);
    sum += l.sum;
    count += l.count;
  }
  EXPECT_NEAR(test_error(c, p, tests, SpecialIds{}, 0.15, 9), sum / static_cast<double>(count), 1e-10);
}

TEST(TestErrorTest, OrderInvariantAndValidated) {
  const EncoderConfig c = small_model();
  const ParameterSet p = init_params(c, 3);
  auto tests = random_sequences(25, 16, 30, 3);
  const double a = test_error(c, p, tests, SpecialIds{}, 0.15, 1);
  std::reverse(tests.begin(), tests.end());
  std::rotate(tests.begin(), tests.begin() + 7, tests.end());
  EXPECT_EQ(test_error(c, p, tests, SpecialIds{}, 0.15, 1), a);
  EXPECT_THROW(test_error(c, p, std::span<const Sequence>{}, SpecialIds{}, 0.15, 1), Error);
}

TEST(TestErrorTest, DropsAfterTraining) {
  const EncoderConfig c = small_model();
  // Small alphabet so the model has something to learn quickly.
  const auto train = random_sequences(64, 16, 9, 4);
  const auto held = random_sequences(32, 16, 9, 5);
  TrainConfig t;
  t.batch_size = 8;
  t.total_steps = 150;
  t.warmup_steps = 10;
  t.lr_peak = 5e-3;
  t.seed = 2;
  const double before = test_error(c, init_params(c, t.seed), held, SpecialIds{}, 0.15, 3);
  const PretrainResult r = pretrain(train, SpecialIds{}, c, t, {});
  EXPECT_LT(test_error(c, r.params, held, SpecialIds{}, 0.15, 3), before);
}

TEST(RepeatedEvalTest, IdenticalSeedsGiveZeroSpread) {
  const EncoderConfig c = small_model();
  const ParameterSet p = init_params(c, 3);
  const auto pool = random_sequences(40, 16, 30, 6);
  const std::vector<size_t> sizes = {10};
  const std::vector<uint64_t> seeds = {77, 77};
  const auto reports = repeated_eval_seeds(c, p, pool, sizes, seeds, SpecialIds{}, 0.15);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].std_error, 0.0);
  EXPECT_EQ(reports[0].trial_errors[0], reports[0].trial_errors[1]);
}

TEST(RepeatedEvalTest, ShapesDeterminismAndErrors) {
  const EncoderConfig c = small_model();
  const ParameterSet p = init_params(c, 3);
  const auto pool = random_sequences(60, 16, 30, 7);
  const std::vector<size_t> sizes = {5, 50};
  const auto a = repeated_eval(c, p, pool, sizes, 6, SpecialIds{}, 0.15, 11);
  const auto b = repeated_eval(c, p, pool, sizes, 6, SpecialIds{}, 0.15, 11);
  ASSERT_EQ(a.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a[i].test_size, sizes[i]);
    EXPECT_EQ(a[i].trials, 6u);
    EXPECT_EQ(a[i].trial_errors, b[i].trial_errors);
    double mean = 0.0;
    for (double e : a[i].trial_errors) mean += e / 6.0;
    EXPECT_NEAR(a[i].mean_error, mean, 1e-12);
    EXPECT_LE(a[i].min_error, a[i].q1);
    EXPECT_LE(a[i].q1, a[i].median);
    EXPECT_LE(a[i].median, a[i].q3);
    EXPECT_LE(a[i].q3, a[i].max_error);
  }
  const std::vector<size_t> too_big = {61};
  EXPECT_THROW(repeated_eval(c, p, pool, too_big, 6, SpecialIds{}, 0.15, 1), Error);
  EXPECT_THROW(repeated_eval(c, p, pool, sizes, 1, SpecialIds{}, 0.15, 1), Error);
  const std::string csv = eval_reports_csv(a);
  EXPECT_EQ(csv.rfind("trial,size,error\n", 0), 0u);
  EXPECT_EQ(static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n')), 13u);
  EXPECT_EQ(eval_reports_json(a).size(), 2u);
}

TEST(RepeatedEvalTest, FullPoolMeanNearTestError) {
  const EncoderConfig c = small_model();
  const ParameterSet p = init_params(c, 3);
  const auto pool = random_sequences(50, 16, 30, 8);
  const std::vector<size_t> sizes = {50};
  const auto r = repeated_eval(c, p, pool, sizes, 20, SpecialIds{}, 0.15, 5);
  const double full = test_error(c, p, pool, SpecialIds{}, 0.15, 123);
  // The full-pool error is itself one mask draw, so the difference carries
  // variance std^2 (1 + 1 / trials).
  EXPECT_LT(std::abs(r[0].mean_error - full), 3 * r[0].std_error * std::sqrt(1.0 + 1.0 / 20.0));
}

TEST(SummaryTest, QuartilesByInterpolation) {
  const EvalReport r = summarize_trials(3, {4.0, 1.0, 3.0, 2.0, 5.0}, {1, 2, 3, 4, 5});
  EXPECT_EQ(r.min_error, 1.0);
  EXPECT_EQ(r.q1, 2.0);
  EXPECT_EQ(r.median, 3.0);
  EXPECT_EQ(r.q3, 4.0);
  EXPECT_EQ(r.max_error, 5.0);
  EXPECT_EQ(r.mean_error, 3.0);
  EXPECT_NEAR(r.std_error, std::sqrt(2.5), 1e-15);
  EXPECT_THROW(summarize_trials(1, {}, {}), Error);
}

TEST(FlopsTest, ReproducesComputingResourceTable) {
  const double tokens[] = {26e9, 52e9, 78e9, 104e9, 156e9};
  const double table[] = {1.95e19, 3.9e19, 5.85e19, 7.8e19, 1.17e20};
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(flops_estimate(125000000ULL, tokens[i]), table[i], 0.03 * table[i]);
  }
  EXPECT_EQ(flops_estimate(125000000ULL, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(flops_estimate(10, 6.0), 2 * flops_estimate(10, 3.0));
  EXPECT_DOUBLE_EQ(flops_estimate(20, 3.0), 2 * flops_estimate(10, 3.0));
  EXPECT_THROW(flops_estimate(10, -1.0), Error);
}

TEST(FlopsTest, LedgerCountsTokensSeen) {
  const EncoderConfig c = preset("124M");
  const ComputeLedger l = compute_ledger(c, 100000, 512, 512);
  EXPECT_EQ(l.tokens_seen, 100000ULL * 512 * 512);
  EXPECT_EQ(l.total_params, count_params(c).total);
  EXPECT_EQ(l.non_embedding_params, count_params(c).non_embedding);
  EXPECT_DOUBLE_EQ(l.flops, 6.0 * static_cast<double>(l.total_params) * static_cast<double>(l.tokens_seen));
  const nlohmann::json j = l;
  const ComputeLedger back = j.get<ComputeLedger>();
  EXPECT_EQ(back.tokens_seen, l.tokens_seen);
  EXPECT_EQ(back.flops, l.flops);
}

}  // namespace
}  // namespace codescale
