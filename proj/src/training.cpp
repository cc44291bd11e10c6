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

#include "codescale/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace codescale {

using nlohmann::json;

MaskedSequence apply_mask(std::span<const int32_t> ids, const PadMask& pad, const SpecialIds& special,
                          double mask_rate, uint64_t seed) {
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw Error("apply_mask: mask_rate must be in (0, 1)");
  if (!pad.empty() && pad.size() != ids.size()) throw Error("apply_mask: pad mask length differs from ids");
  std::vector<size_t> maskable;
  for (size_t i = 0; i < ids.size(); ++i) {
    const bool is_pad = !pad.empty() && pad[i];
    const int32_t id = ids[i];
    const bool is_special = id == special.cls || id == special.sep || id == special.mask || id == special.pad ||
                            id == special.unk;
    if (!is_pad && !is_special) maskable.push_back(i);
  }
  if (maskable.empty()) throw Error("apply_mask: sequence has no maskable tokens");

  Rng rng(seed);
  MaskedSequence out;
  out.input.assign(ids.begin(), ids.end());
  out.pad = pad.empty() ? PadMask(ids.size(), 0) : pad;
  for (size_t pos : maskable) {
    if (rng.uniform() < mask_rate) out.positions.push_back(pos);
  }
  if (out.positions.empty()) out.positions.push_back(maskable[rng.below(maskable.size())]);
  for (size_t pos : out.positions) {
    out.targets.push_back(out.input[pos]);
    out.input[pos] = special.mask;
  }
  return out;
}

MaskedSequence apply_mask(const Sequence& sequence, const SpecialIds& special, double mask_rate, uint64_t seed) {
  return apply_mask(sequence.ids, pad_mask_for_length(sequence.ids.size(), sequence.length), special, mask_rate, seed);
}

namespace {

double log_sum_exp(const Eigen::Ref<const RowVector>& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

}  // namespace

MlmLoss mlm_loss(const Matrix& logits, const MaskedSequence& masked) {
  if (masked.positions.empty()) throw Error("mlm_loss: no masked positions");
  MlmLoss loss;
  for (size_t i = 0; i < masked.positions.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(masked.positions[i]);
    const auto target = static_cast<Eigen::Index>(masked.targets[i]);
    if (row >= logits.rows() || target >= logits.cols()) throw Error("mlm_loss: position or target out of range");
    loss.sum += log_sum_exp(logits.row(row)) - logits(row, target);
  }
  loss.count = masked.positions.size();
  return loss;
}

Matrix mlm_loss_grad(const Matrix& logits, const MaskedSequence& masked, double weight) {
  Matrix d = Matrix::Zero(logits.rows(), logits.cols());
  if (masked.positions.empty()) return d;
  const double w = weight / static_cast<double>(masked.positions.size());
  for (size_t i = 0; i < masked.positions.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(masked.positions[i]);
    const double lse = log_sum_exp(logits.row(row));
    d.row(row) += ((logits.row(row).array() - lse).exp() * w).matrix();
    d(row, masked.targets[i]) -= w;
  }
  return d;
}

BatchGradient mlm_gradients(const EncoderConfig& config, const ParameterSet& params, const MaskedBatch& batch,
                            uint64_t batch_id, std::span<const uint64_t> dropout_seeds) {
  BatchGradient out;
  out.grads = ParameterSet::zeros(config);
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& masked = batch[i];
    // No targets: the loss is constant, so the sequence contributes nothing.
    if (masked.positions.empty()) continue;
    std::optional<Rng> rng;
    ForwardOptions options;
    options.keep_cache = true;
    if (i < dropout_seeds.size() && config.dropout > 0.0) {
      rng.emplace(dropout_seeds[i]);
      options.dropout_rng = &*rng;
    }
    const ForwardTrace trace = forward(config, params, masked.input, masked.pad, options);
    const double loss = mlm_loss(trace, masked).mean();
    if (!std::isfinite(loss)) {
      throw NonFiniteLossError(batch_id, "non-finite loss in batch " + std::to_string(batch_id));
    }
    out.loss_sum += loss;
    const Matrix d_logits = mlm_loss_grad(trace.logits, masked, 1.0);
    accumulate_backward(config, params, trace, &d_logits, nullptr, out.grads);
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error("train config: batch_size must be >= 1");
  if (accum_steps == 0 || batch_size % accum_steps != 0) {
    throw Error("train config: accum_steps must divide batch_size");
  }
  if (total_steps > 0 && warmup_steps >= total_steps) throw Error("train config: warmup_steps must be < total_steps");
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw Error("train config: mask_rate must be in (0, 1)");
  if (!(lr_peak >= 0.0)) throw Error("train config: lr_peak must be nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw Error("train config: betas must be in [0, 1)");
  if (!(eps > 0.0)) throw Error("train config: eps must be positive");
  if (!(weight_decay >= 0.0)) throw Error("train config: weight_decay must be nonnegative");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size}, {"accum_steps", c.accum_steps}, {"lr_peak", c.lr_peak},
           {"warmup_steps", c.warmup_steps}, {"total_steps", c.total_steps}, {"mask_rate", c.mask_rate},
           {"weight_decay", c.weight_decay}, {"beta1", c.beta1}, {"beta2", c.beta2},
           {"eps", c.eps}, {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  const TrainConfig d;
  c.batch_size = j.value("batch_size", d.batch_size);
  c.accum_steps = j.value("accum_steps", d.accum_steps);
  c.lr_peak = j.value("lr_peak", d.lr_peak);
  c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
  c.total_steps = j.value("total_steps", d.total_steps);
  c.mask_rate = j.value("mask_rate", d.mask_rate);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.eps = j.value("eps", d.eps);
  c.seed = j.value("seed", d.seed);
  c.validate();
}

double lr_at(const TrainConfig& config, uint64_t step) {
  if (step > config.total_steps) {
    throw Error("lr_at: step " + std::to_string(step) + " outside [0, " + std::to_string(config.total_steps) + "]");
  }
  if (step < config.warmup_steps) {
    return config.lr_peak * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  }
  if (config.total_steps == config.warmup_steps) return config.lr_peak;
  return config.lr_peak * static_cast<double>(config.total_steps - step) /
         static_cast<double>(config.total_steps - config.warmup_steps);
}

void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                  uint64_t t, double lr, double weight_decay, const TrainConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error("adamw_update: size mismatch");
  }
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    params[i] -= lr * weight_decay * params[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void adamw_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, double lr,
                const TrainConfig& config) {
  if (!grads.all_finite()) throw Error("adamw_step: non-finite gradient");
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) throw Error("adamw_step: layout mismatch");
  ++state.step;
  for (size_t i = 0; i < p.size(); ++i) {
    const auto n = static_cast<size_t>(p[i].size());
    if (static_cast<size_t>(g[i].size()) != n || static_cast<size_t>(m[i].size()) != n) {
      throw Error("adamw_step: shape mismatch at " + p[i].name);
    }
    const bool is_matrix = p[i].rows > 1 && p[i].cols > 1;
    adamw_update({p[i].data, n}, {g[i].data, n}, {m[i].data, n}, {v[i].data, n}, state.step, lr,
                 is_matrix ? config.weight_decay : 0.0, config);
  }
}

std::string LossTrace::to_csv() const {
  std::string out = "step,loss,lr,tokens_seen\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%llu\n", static_cast<unsigned long long>(r.step), r.loss, r.lr,
                  static_cast<unsigned long long>(r.tokens_seen));
    out += buf;
  }
  return out;
}

LossTrace LossTrace::from_csv(std::string_view text) {
  LossTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "step,loss,lr,tokens_seen") throw Error("loss trace: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossRecord r;
    unsigned long long step = 0, tokens = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%llu", &step, &r.loss, &r.lr, &tokens) != 4) {
      throw Error("loss trace: malformed line '" + line + "'");
    }
    r.step = step;
    r.tokens_seen = tokens;
    trace.records.push_back(r);
  }
  return trace;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& directory, uint64_t step) {
  return directory / ("step_" + std::to_string(step) + ".ckpt");
}

size_t DataOrder::at(uint64_t global_index) {
  if (count_ == 0) throw Error("DataOrder: no sequences");
  const uint64_t epoch = global_index / count_;
  if (epoch != epoch_) {
    order_.resize(count_);
    std::iota(order_.begin(), order_.end(), size_t{0});
    Rng rng(mix_seed(seed_, epoch, 0x6f72646572ULL));
    rng.shuffle(std::span<size_t>(order_));
    epoch_ = epoch;
  }
  return order_[global_index % count_];
}

PretrainResult pretrain(const std::vector<Sequence>& train, const SpecialIds& special, const EncoderConfig& model,
                        const TrainConfig& config, const CheckpointPolicy& policy,
                        const std::optional<Checkpoint>& resume, const StepCallback& on_step) {
  model.validate();
  config.validate();
  if (train.empty()) throw Error("pretrain: empty training set");

  PretrainResult result;
  uint64_t start = 0;
  if (resume) {
    if (!(resume->config == model)) throw Error("pretrain: resume checkpoint has a different model config");
    result.params = resume->params;
    result.optimizer = resume->optimizer ? *resume->optimizer : AdamState::zeros(model);
    start = resume->step;
    if (start > config.total_steps) throw Error("pretrain: resume step beyond total_steps");
  } else {
    result.params = init_params(model, config.seed);
    result.optimizer = AdamState::zeros(model);
  }

  const size_t window = train.front().ids.size();
  const size_t micro = config.batch_size / config.accum_steps;
  DataOrder order(train.size(), config.seed);

  auto save = [&](const std::filesystem::path& path, uint64_t step) {
    Checkpoint ck;
    ck.config = model;
    ck.params = result.params;
    ck.step = step;
    ck.stream = {config.seed, step * config.batch_size};
    if (policy.keep_optimizer) ck.optimizer = result.optimizer;
    save_checkpoint(path, ck);
    return path;
  };

  for (uint64_t step = start + 1; step <= config.total_steps; ++step) {
    ParameterSet step_grad = ParameterSet::zeros(model);
    double loss_total = 0.0;
    try {
      for (size_t j = 0; j < config.accum_steps; ++j) {
        MaskedBatch batch;
        std::vector<uint64_t> drop_seeds;
        for (size_t s = 0; s < micro; ++s) {
          const uint64_t g = (step - 1) * config.batch_size + j * micro + s;
          const Sequence& seq = train[order.at(g)];
          if (seq.ids.size() != window) throw Error("pretrain: training sequences differ in length");
          batch.push_back(apply_mask(seq, special, config.mask_rate, mix_seed(config.seed, g, 1)));
          drop_seeds.push_back(mix_seed(config.seed, g, 2));
        }
        BatchGradient bg = mlm_gradients(model, result.params, batch, step, drop_seeds);
        step_grad.add(bg.grads);
        loss_total += bg.loss_sum;
      }
    } catch (const NonFiniteLossError&) {
      if (!policy.directory.empty()) save(policy.directory / "last_good.ckpt", step - 1);
      throw;
    }
    const double inv = 1.0 / static_cast<double>(config.batch_size);
    step_grad.scale(inv);
    const double loss = loss_total * inv;
    if (!std::isfinite(loss) || !step_grad.all_finite()) {
      if (!policy.directory.empty()) save(policy.directory / "last_good.ckpt", step - 1);
      throw NonFiniteLossError(step, "non-finite loss or gradient at step " + std::to_string(step));
    }
    const double lr = lr_at(config, step);
    adamw_step(result.params, step_grad, result.optimizer, lr, config);

    LossRecord rec{step, loss, lr, step * config.batch_size * window};
    result.trace.records.push_back(rec);
    if (on_step) on_step(rec, result.params);

    if (!policy.directory.empty()) {
      const bool periodic = policy.every > 0 && step % policy.every == 0;
      const bool listed = std::find(policy.at_steps.begin(), policy.at_steps.end(), step) != policy.at_steps.end();
      if (periodic || listed) result.checkpoints.push_back(save(checkpoint_path(policy.directory, step), step));
    }
  }
  return result;
}

}  // namespace codescale
