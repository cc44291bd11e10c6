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

#include "codescale/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace codescale {

using nlohmann::json;

uint64_t sequence_mask_seed(uint64_t seed, const Sequence& sequence) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(sequence.length);
  for (int32_t id : sequence.ids) feed(static_cast<uint32_t>(id));
  return mix_seed(seed, h);
}

MlmLoss test_loss(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> tests,
                  const SpecialIds& special, double mask_rate, uint64_t seed) {
  if (tests.empty()) throw Error("test_error: empty test set");
  struct Partial {
    uint64_t key;
    double sum;
    size_t count;
  };
  std::vector<Partial> parts(tests.size());
  const Matrix& head = config.tied_head ? params.token_embedding : params.head_weight;
  parallel_for(tests.size(), [&](size_t i) {
    const uint64_t s = sequence_mask_seed(seed, tests[i]);
    const MaskedSequence masked = apply_mask(tests[i], special, mask_rate, s);
    ForwardOptions options;
    options.compute_logits = false;
    const ForwardTrace trace = forward(config, params, masked.input, masked.pad, options);
    const Matrix& h = trace.hidden_states.back();
    double sum = 0.0;
    for (size_t k = 0; k < masked.positions.size(); ++k) {
      const RowVector logits = h.row(static_cast<Eigen::Index>(masked.positions[k])) * head.transpose() + params.head_bias;
      const double mx = logits.maxCoeff();
      sum += mx + std::log((logits.array() - mx).exp().sum()) - logits(masked.targets[k]);
    }
    parts[i] = {s, sum, masked.positions.size()};
  });
  std::sort(parts.begin(), parts.end(), [](const Partial& a, const Partial& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.sum != b.sum) return a.sum < b.sum;
    return a.count < b.count;
  });
  MlmLoss total;
  for (const auto& p : parts) {
    total.sum += p.sum;
    total.count += p.count;
  }
  return total;
}

double test_error(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> tests,
                  const SpecialIds& special, double mask_rate, uint64_t seed) {
  return test_loss(config, params, tests, special, mask_rate, seed).mean();
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EvalReport summarize_trials(size_t test_size, std::vector<double> values, std::vector<uint64_t> seeds) {
  if (values.empty()) throw Error("summarize_trials: no trials");
  EvalReport r;
  r.test_size = test_size;
  r.trials = values.size();
  r.seeds = std::move(seeds);
  const double n = static_cast<double>(values.size());
  r.mean_error = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean_error) * (v - r.mean_error);
  r.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  r.min_error = sorted.front();
  r.max_error = sorted.back();
  r.q1 = quantile(sorted, 0.25);
  r.median = quantile(sorted, 0.5);
  r.q3 = quantile(sorted, 0.75);
  r.trial_errors = std::move(values);
  return r;
}

namespace {

std::vector<EvalReport> run_trials(const EncoderConfig& config, const ParameterSet& params,
                                   std::span<const Sequence> pool, std::span<const size_t> sizes,
                                   const std::function<uint64_t(size_t size, size_t trial)>& seed_of, size_t trials,
                                   const SpecialIds& special, double mask_rate) {
  if (trials < 2) throw Error("repeated_eval: need at least 2 trials");
  for (size_t n : sizes) {
    if (n == 0) throw Error("repeated_eval: sizes must be positive");
    if (n > pool.size()) {
      throw Error("repeated_eval: pool has " + std::to_string(pool.size()) + " sequences, size " + std::to_string(n) +
                  " requested");
    }
  }
  std::vector<EvalReport> reports;
  for (size_t n : sizes) {
    std::vector<double> errors;
    std::vector<uint64_t> seeds;
    for (size_t t = 0; t < trials; ++t) {
      const uint64_t s = seed_of(n, t);
      std::vector<size_t> idx(pool.size());
      std::iota(idx.begin(), idx.end(), size_t{0});
      Rng rng(s);
      for (size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + static_cast<size_t>(rng.below(pool.size() - i))]);
      std::vector<Sequence> subset;
      subset.reserve(n);
      for (size_t i = 0; i < n; ++i) subset.push_back(pool[idx[i]]);
      errors.push_back(test_error(config, params, subset, special, mask_rate, s));
      seeds.push_back(s);
    }
    reports.push_back(summarize_trials(n, std::move(errors), std::move(seeds)));
  }
  return reports;
}

}  // namespace

std::vector<EvalReport> repeated_eval(const EncoderConfig& config, const ParameterSet& params,
                                      std::span<const Sequence> pool, std::span<const size_t> sizes, size_t trials,
                                      const SpecialIds& special, double mask_rate, uint64_t seed) {
  return run_trials(
      config, params, pool, sizes, [seed](size_t n, size_t t) { return mix_seed(seed, n, t); }, trials, special,
      mask_rate);
}

std::vector<EvalReport> repeated_eval_seeds(const EncoderConfig& config, const ParameterSet& params,
                                            std::span<const Sequence> pool, std::span<const size_t> sizes,
                                            std::span<const uint64_t> trial_seeds, const SpecialIds& special,
                                            double mask_rate) {
  return run_trials(
      config, params, pool, sizes, [trial_seeds](size_t, size_t t) { return trial_seeds[t]; }, trial_seeds.size(),
      special, mask_rate);
}

std::string eval_reports_csv(std::span<const EvalReport> reports) {
  std::string out = "trial,size,error\n";
  char buf[96];
  for (const auto& r : reports) {
    for (size_t t = 0; t < r.trial_errors.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", t, r.test_size, r.trial_errors[t]);
      out += buf;
    }
  }
  return out;
}

json eval_reports_json(std::span<const EvalReport> reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back({{"size", r.test_size}, {"trials", r.trials}, {"mean", r.mean_error}, {"std", r.std_error},
                   {"min", r.min_error}, {"q1", r.q1}, {"median", r.median}, {"q3", r.q3}, {"max", r.max_error},
                   {"seeds", r.seeds}});
  }
  return arr;
}

double flops_estimate(uint64_t total_params, double tokens) {
  if (tokens < 0) throw Error("flops_estimate: tokens must be nonnegative");
  return 6.0 * static_cast<double>(total_params) * tokens;
}

double flops_estimate(const EncoderConfig& config, double tokens) {
  return flops_estimate(count_params(config).total, tokens);
}

ComputeLedger compute_ledger(const EncoderConfig& config, uint64_t iterations, uint64_t batch_size,
                             uint64_t sequence_length) {
  ComputeLedger l;
  const auto counts = count_params(config);
  l.iterations = iterations;
  l.tokens_seen = iterations * batch_size * sequence_length;
  l.total_params = counts.total;
  l.non_embedding_params = counts.non_embedding;
  l.flops = flops_estimate(counts.total, static_cast<double>(l.tokens_seen));
  return l;
}

void to_json(json& j, const ComputeLedger& l) {
  j = json{{"iterations", l.iterations}, {"tokens_seen", l.tokens_seen}, {"total_params", l.total_params},
           {"non_embedding_params", l.non_embedding_params}, {"flops", l.flops}};
}

void from_json(const json& j, ComputeLedger& l) {
  l.iterations = j.at("iterations").get<uint64_t>();
  l.tokens_seen = j.at("tokens_seen").get<uint64_t>();
  l.total_params = j.at("total_params").get<uint64_t>();
  l.non_embedding_params = j.at("non_embedding_params").get<uint64_t>();
  l.flops = j.at("flops").get<double>();
}

}  // namespace codescale
