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

#include <Eigen/Dense>

#include "codescale/common.hpp"

namespace codescale {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class NormPlacement { kPost, kPre };

std::string to_string(NormPlacement placement);
NormPlacement parse_norm_placement(const std::string& text);

struct EncoderConfig {
  int layers = 2;
  int hidden = 64;
  int heads = 4;
  int head_size = 16;
  int intermediate = 256;
  int vocab = 512;
  int max_seq = 64;
  NormPlacement norm_placement = NormPlacement::kPost;
  // MLM output head shares the token-embedding matrix.
  bool tied_head = true;
  // Residual-branch and embedding dropout, active only when a dropout RNG is
  // supplied to forward().
  double dropout = 0.0;
  double layer_norm_eps = 1e-5;

  /// Throws Error when the shape is inconsistent (heads * head_size != hidden,
  /// non-positive counts, max_seq < 2, dropout outside [0, 1)).
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Builds a config with intermediate = 4 * hidden.
EncoderConfig make_config(int layers, int hidden, int heads, int head_size, int vocab, int max_seq,
                          NormPlacement placement = NormPlacement::kPost);

/// Named architectures: "124M", "354M", "757M", "1.5B" (vocab 50,265,
/// max_seq 512; "1.5B" uses pre-norm) and the desk-scale ladder
/// "desk-xs", "desk-s", "desk-m", "desk-l".
EncoderConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct ParamCount {
  uint64_t total = 0;
  uint64_t non_embedding = 0;
};

/// Closed-form element counts. Non-embedding excludes the token and position
/// embedding matrices.
ParamCount count_params(const EncoderConfig& config);

/// Mutable view of one parameter tensor, row-major.
struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

struct LayerParams {
  Matrix wq, wk, wv, wo;  // [hidden x hidden], applied as x * W
  RowVector bq, bk, bv, bo;
  RowVector ln1_gain, ln1_bias;
  Matrix w1;  // [hidden x intermediate]
  RowVector b1;
  Matrix w2;  // [intermediate x hidden]
  RowVector b2;
  RowVector ln2_gain, ln2_bias;
};

/// All trainable tensors. `outer_norm` is the single norm outside the layer
/// stack: it normalizes the embedding sum in post-norm models and is the final
/// norm in pre-norm models, so both placements have equal parameter counts.
struct ParameterSet {
  Matrix token_embedding;     // [vocab x hidden]
  Matrix position_embedding;  // [max_seq x hidden]
  RowVector outer_norm_gain, outer_norm_bias;
  std::vector<LayerParams> layers;
  Matrix head_weight;  // [vocab x hidden]; empty when the head is tied
  RowVector head_bias;  // [vocab]

  /// Zero-valued tensors shaped for `config`.
  static ParameterSet zeros(const EncoderConfig& config);

  /// Views in declaration order (the checkpoint order).
  std::vector<TensorView> tensors();
  std::vector<TensorView> tensors() const;
  uint64_t element_count() const;

  void set_zero();
  void add(const ParameterSet& other, double scale = 1.0);
  void scale(double factor);
  bool all_finite() const;
  double max_abs_diff(const ParameterSet& other) const;
  bool operator==(const ParameterSet& other) const;
};

/// Truncated-normal (std 0.02) matrices, zero biases, unit norm gains.
ParameterSet init_params(const EncoderConfig& config, uint64_t seed);

/// Padding flags, one per position; nonzero marks a pad position.
using PadMask = std::vector<uint8_t>;
PadMask pad_mask_for_length(size_t window, size_t length);

struct LayerNormCache {
  Matrix normalized;
  Eigen::VectorXd inv_std;
};

/// Per-layer intermediates kept for the backward pass.
struct LayerCache {
  Matrix input;
  LayerNormCache ln1, ln2;
  Matrix attn_in;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // one [seq x seq] matrix per head
  Matrix context;
  Matrix attn_drop, mlp_drop;  // dropout multipliers (empty when inactive)
  Matrix mid;
  Matrix mlp_in;
  Matrix pre_act, act;
};

struct ForwardCache {
  std::vector<int32_t> ids;
  PadMask pad;
  LayerNormCache outer;
  Matrix embed_drop;
  std::vector<LayerCache> layers;
  Matrix stream_out;  // residual stream after the last layer
};

struct ForwardTrace {
  Matrix logits;                      // [seq x vocab]
  std::vector<Matrix> hidden_states;  // layers + 1 entries, [seq x hidden]
  ForwardCache cache;                 // populated when keep_cache is set

  /// Attention probabilities of layer `layer`, head `head` (needs cache).
  const Matrix& attention(size_t layer, size_t head) const { return cache.layers.at(layer).probs.at(head); }
};

struct ForwardOptions {
  bool keep_cache = false;
  bool compute_logits = true;
  Rng* dropout_rng = nullptr;
};

/// Encoder forward pass over one sequence. Pad positions receive no attention
/// mass. Throws when the sequence is longer than max_seq, is empty, is all
/// padding, or holds an id outside the vocabulary.
ForwardTrace forward(const EncoderConfig& config, const ParameterSet& params, std::span<const int32_t> ids,
                     const PadMask& pad_mask, const ForwardOptions& options = {});

/// Back-propagates upstream gradients on the logits and/or on the final hidden
/// state (either may be null) through a trace recorded with keep_cache, adding
/// the parameter gradients into `grads`.
void accumulate_backward(const EncoderConfig& config, const ParameterSet& params, const ForwardTrace& trace,
                         const Matrix* d_logits, const Matrix* d_final_hidden, ParameterSet& grads);

double gelu(double x);
double gelu_grad(double x);

}  // namespace codescale
