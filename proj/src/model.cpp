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

#include "codescale/model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace codescale {

std::string to_string(NormPlacement placement) { return placement == NormPlacement::kPre ? "pre" : "post"; }

NormPlacement parse_norm_placement(const std::string& text) {
  if (text == "pre") return NormPlacement::kPre;
  if (text == "post") return NormPlacement::kPost;
  throw Error("norm placement must be 'pre' or 'post', got '" + text + "'");
}

void EncoderConfig::validate() const {
  if (layers < 1 || hidden < 1 || heads < 1 || head_size < 1 || intermediate < 1 || vocab < 1) {
    throw Error("encoder config: all counts must be >= 1");
  }
  if (max_seq < 2) throw Error("encoder config: max_seq must be >= 2");
  if (heads * head_size != hidden) {
    throw Error("encoder config: heads * head_size (" + std::to_string(heads * head_size) + ") != hidden (" +
                std::to_string(hidden) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("encoder config: dropout must be in [0, 1)");
  if (!(layer_norm_eps > 0.0)) throw Error("encoder config: layer_norm_eps must be positive");
}

EncoderConfig make_config(int layers, int hidden, int heads, int head_size, int vocab, int max_seq,
                          NormPlacement placement) {
  EncoderConfig c;
  c.layers = layers;
  c.hidden = hidden;
  c.heads = heads;
  c.head_size = head_size;
  c.intermediate = 4 * hidden;
  c.vocab = vocab;
  c.max_seq = max_seq;
  c.norm_placement = placement;
  return c;
}

namespace {

struct PresetRow {
  const char* name;
  int layers, hidden, heads, head_size, vocab, max_seq;
  NormPlacement placement;
};

constexpr int kCsnVocab = 50265;
constexpr int kDeskVocab = 512;
constexpr int kDeskSeq = 64;

const PresetRow kPresets[] = {
    {"124M", 12, 768, 12, 64, kCsnVocab, 512, NormPlacement::kPost},
    {"354M", 24, 1024, 16, 64, kCsnVocab, 512, NormPlacement::kPost},
    {"757M", 24, 1536, 16, 96, kCsnVocab, 512, NormPlacement::kPost},
    // Deeper than 757M the post-norm stack degrades; this row is pre-norm.
    {"1.5B", 32, 1920, 20, 96, kCsnVocab, 512, NormPlacement::kPre},
    {"desk-xs", 1, 48, 2, 24, kDeskVocab, kDeskSeq, NormPlacement::kPre},
    {"desk-s", 2, 96, 4, 24, kDeskVocab, kDeskSeq, NormPlacement::kPre},
    {"desk-m", 3, 160, 4, 40, kDeskVocab, kDeskSeq, NormPlacement::kPre},
    {"desk-l", 4, 192, 4, 48, kDeskVocab, kDeskSeq, NormPlacement::kPre},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& row : kPresets) names.emplace_back(row.name);
  return names;
}

EncoderConfig preset(const std::string& name) {
  for (const auto& row : kPresets) {
    if (name == row.name) {
      return make_config(row.layers, row.hidden, row.heads, row.head_size, row.vocab, row.max_seq, row.placement);
    }
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error("unknown model preset '" + name + "' (known: " + known + ")");
}

ParamCount count_params(const EncoderConfig& c) {
  c.validate();
  const uint64_t h = static_cast<uint64_t>(c.hidden);
  const uint64_t inter = static_cast<uint64_t>(c.intermediate);
  const uint64_t v = static_cast<uint64_t>(c.vocab);
  const uint64_t s = static_cast<uint64_t>(c.max_seq);
  const uint64_t per_layer = 4 * (h * h + h)        // q, k, v, o projections
                             + (h * inter + inter)  // mlp in
                             + (inter * h + h)      // mlp out
                             + 4 * h;               // two norms
  const uint64_t embeddings = v * h + s * h;
  const uint64_t rest = 2 * h + static_cast<uint64_t>(c.layers) * per_layer + (c.tied_head ? 0 : v * h) + v;
  return {embeddings + rest, rest};
}

// ---------------------------------------------------------------------------

ParameterSet ParameterSet::zeros(const EncoderConfig& c) {
  c.validate();
  ParameterSet p;
  p.token_embedding = Matrix::Zero(c.vocab, c.hidden);
  p.position_embedding = Matrix::Zero(c.max_seq, c.hidden);
  p.outer_norm_gain = RowVector::Zero(c.hidden);
  p.outer_norm_bias = RowVector::Zero(c.hidden);
  p.layers.resize(static_cast<size_t>(c.layers));
  for (auto& l : p.layers) {
    for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo}) *m = Matrix::Zero(c.hidden, c.hidden);
    for (RowVector* b : {&l.bq, &l.bk, &l.bv, &l.bo, &l.ln1_gain, &l.ln1_bias, &l.b2, &l.ln2_gain, &l.ln2_bias}) {
      *b = RowVector::Zero(c.hidden);
    }
    l.w1 = Matrix::Zero(c.hidden, c.intermediate);
    l.b1 = RowVector::Zero(c.intermediate);
    l.w2 = Matrix::Zero(c.intermediate, c.hidden);
  }
  if (!c.tied_head) p.head_weight = Matrix::Zero(c.vocab, c.hidden);
  p.head_bias = RowVector::Zero(c.vocab);
  return p;
}

namespace {

template <typename Set, typename Fn>
void visit(Set& p, Fn&& fn) {
  fn("token_embedding", p.token_embedding);
  fn("position_embedding", p.position_embedding);
  fn("outer_norm.gain", p.outer_norm_gain);
  fn("outer_norm.bias", p.outer_norm_bias);
  for (size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    fn(pre + "attn.wq", l.wq);
    fn(pre + "attn.bq", l.bq);
    fn(pre + "attn.wk", l.wk);
    fn(pre + "attn.bk", l.bk);
    fn(pre + "attn.wv", l.wv);
    fn(pre + "attn.bv", l.bv);
    fn(pre + "attn.wo", l.wo);
    fn(pre + "attn.bo", l.bo);
    fn(pre + "ln1.gain", l.ln1_gain);
    fn(pre + "ln1.bias", l.ln1_bias);
    fn(pre + "mlp.w1", l.w1);
    fn(pre + "mlp.b1", l.b1);
    fn(pre + "mlp.w2", l.w2);
    fn(pre + "mlp.b2", l.b2);
    fn(pre + "ln2.gain", l.ln2_gain);
    fn(pre + "ln2.bias", l.ln2_bias);
  }
  if (p.head_weight.size() > 0) fn("head.weight", p.head_weight);
  fn("head.bias", p.head_bias);
}

}  // namespace

std::vector<TensorView> ParameterSet::tensors() {
  std::vector<TensorView> out;
  visit(*this, [&](const std::string& name, auto& t) { out.push_back({name, t.data(), t.rows(), t.cols()}); });
  return out;
}

std::vector<TensorView> ParameterSet::tensors() const {
  return const_cast<ParameterSet*>(this)->tensors();
}

uint64_t ParameterSet::element_count() const {
  uint64_t n = 0;
  for (const auto& t : tensors()) n += static_cast<uint64_t>(t.size());
  return n;
}

void ParameterSet::set_zero() {
  for (auto& t : tensors()) std::fill(t.data, t.data + t.size(), 0.0);
}

void ParameterSet::add(const ParameterSet& other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  if (mine.size() != theirs.size()) throw Error("ParameterSet::add: layout mismatch");
  for (size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].size() != theirs[i].size()) throw Error("ParameterSet::add: shape mismatch at " + mine[i].name);
    for (Eigen::Index j = 0; j < mine[i].size(); ++j) mine[i].data[j] += scale * theirs[i].data[j];
  }
}

void ParameterSet::scale(double factor) {
  for (auto& t : tensors()) {
    for (Eigen::Index j = 0; j < t.size(); ++j) t.data[j] *= factor;
  }
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors()) {
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      if (!std::isfinite(t.data[j])) return false;
    }
  }
  return true;
}

double ParameterSet::max_abs_diff(const ParameterSet& other) const {
  auto a = tensors();
  auto b = other.tensors();
  if (a.size() != b.size()) throw Error("ParameterSet::max_abs_diff: layout mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw Error("ParameterSet::max_abs_diff: shape mismatch at " + a[i].name);
    for (Eigen::Index j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i].data[j] - b[i].data[j]));
  }
  return worst;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  auto a = tensors();
  auto b = other.tensors();
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].rows != b[i].rows || a[i].cols != b[i].cols) return false;
    if (!std::equal(a[i].data, a[i].data + a[i].size(), b[i].data)) return false;
  }
  return true;
}

ParameterSet init_params(const EncoderConfig& config, uint64_t seed) {
  ParameterSet p = ParameterSet::zeros(config);
  Rng rng(seed);
  constexpr double kStd = 0.02;
  auto fill = [&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.truncated_normal(kStd);
  };
  fill(p.token_embedding);
  fill(p.position_embedding);
  p.outer_norm_gain.setOnes();
  for (auto& l : p.layers) {
    for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2}) fill(*m);
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
  }
  if (p.head_weight.size() > 0) fill(p.head_weight);
  return p;
}

PadMask pad_mask_for_length(size_t window, size_t length) {
  PadMask mask(window, 0);
  for (size_t i = length; i < window; ++i) mask[i] = 1;
  return mask;
}

// ---------------------------------------------------------------------------
// Forward / backward

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

namespace {

Matrix layer_norm(const Matrix& x, const RowVector& gain, const RowVector& bias, double eps, LayerNormCache* cache) {
  const Eigen::Index n = x.rows();
  Matrix normalized(n, x.cols());
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).mean();
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(x.cols());
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normalized.row(r) = centered * inv_std(r);
  }
  Matrix y = (normalized.array().rowwise() * gain.array()).rowwise() + bias.array();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache, const RowVector& gain, RowVector& d_gain,
                           RowVector& d_bias) {
  d_gain += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  d_bias += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.array();
  const double width = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / width;
    const double mean_dx = dxhat.row(r).dot(cache.normalized.row(r)) / width;
    dx.row(r) = (dxhat.row(r).array() - mean_d - cache.normalized.row(r).array() * mean_dx) * cache.inv_std(r);
  }
  return dx;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

}  // namespace

ForwardTrace forward(const EncoderConfig& config, const ParameterSet& params, std::span<const int32_t> ids,
                     const PadMask& pad_mask, const ForwardOptions& options) {
  config.validate();
  const auto seq = static_cast<Eigen::Index>(ids.size());
  if (seq == 0) throw Error("forward: empty sequence");
  if (seq > config.max_seq) {
    throw Error("forward: sequence length " + std::to_string(seq) + " exceeds max_seq " + std::to_string(config.max_seq));
  }
  PadMask pad = pad_mask;
  if (pad.empty()) pad.assign(ids.size(), 0);
  if (pad.size() != ids.size()) throw Error("forward: pad mask length differs from sequence length");
  bool any_real = false;
  for (auto p : pad) any_real |= p == 0;
  if (!any_real) throw Error("forward: sequence is entirely padding");

  const bool drop = options.dropout_rng != nullptr && config.dropout > 0.0;
  const bool pre = config.norm_placement == NormPlacement::kPre;
  const double eps = config.layer_norm_eps;
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.head_size));

  ForwardTrace trace;
  ForwardCache& cache = trace.cache;
  const bool keep = options.keep_cache;

  Matrix x(seq, config.hidden);
  for (Eigen::Index t = 0; t < seq; ++t) {
    const int32_t id = ids[static_cast<size_t>(t)];
    if (id < 0 || id >= config.vocab) throw Error("forward: token id " + std::to_string(id) + " outside vocabulary");
    x.row(t) = params.token_embedding.row(id) + params.position_embedding.row(t);
  }
  if (!pre) x = layer_norm(x, params.outer_norm_gain, params.outer_norm_bias, eps, keep ? &cache.outer : nullptr);
  if (drop) {
    Matrix m = dropout_mask(seq, config.hidden, config.dropout, *options.dropout_rng);
    x.array() *= m.array();
    if (keep) cache.embed_drop = std::move(m);
  }
  trace.hidden_states.push_back(x);
  if (keep) {
    cache.ids.assign(ids.begin(), ids.end());
    cache.pad = pad;
    cache.layers.resize(static_cast<size_t>(config.layers));
  }

  for (int li = 0; li < config.layers; ++li) {
    const LayerParams& lp = params.layers[static_cast<size_t>(li)];
    LayerCache local;
    LayerCache& lc = keep ? cache.layers[static_cast<size_t>(li)] : local;
    if (keep) lc.input = x;

    // Attention sublayer.
    Matrix a_in = pre ? layer_norm(x, lp.ln1_gain, lp.ln1_bias, eps, keep ? &lc.ln1 : nullptr) : x;
    Matrix q = (a_in * lp.wq).rowwise() + lp.bq;
    Matrix k = (a_in * lp.wk).rowwise() + lp.bk;
    Matrix v = (a_in * lp.wv).rowwise() + lp.bv;
    Matrix context(seq, config.hidden);
    if (keep) lc.probs.resize(static_cast<size_t>(config.heads));
    for (int h = 0; h < config.heads; ++h) {
      const Eigen::Index off = static_cast<Eigen::Index>(h) * config.head_size;
      Matrix scores = q.middleCols(off, config.head_size) * k.middleCols(off, config.head_size).transpose() * scale;
      for (Eigen::Index r = 0; r < seq; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < seq; ++c) {
          if (!pad[static_cast<size_t>(c)]) mx = std::max(mx, scores(r, c));
        }
        double total = 0.0;
        for (Eigen::Index c = 0; c < seq; ++c) {
          const double e = pad[static_cast<size_t>(c)] ? 0.0 : std::exp(scores(r, c) - mx);
          scores(r, c) = e;
          total += e;
        }
        scores.row(r) /= total;
      }
      context.middleCols(off, config.head_size) = scores * v.middleCols(off, config.head_size);
      if (keep) lc.probs[static_cast<size_t>(h)] = std::move(scores);
    }
    Matrix attn_out = (context * lp.wo).rowwise() + lp.bo;
    if (drop) {
      Matrix m = dropout_mask(seq, config.hidden, config.dropout, *options.dropout_rng);
      attn_out.array() *= m.array();
      if (keep) lc.attn_drop = std::move(m);
    }
    Matrix mid = x + attn_out;
    if (!pre) mid = layer_norm(mid, lp.ln1_gain, lp.ln1_bias, eps, keep ? &lc.ln1 : nullptr);

    // MLP sublayer.
    Matrix m_in = pre ? layer_norm(mid, lp.ln2_gain, lp.ln2_bias, eps, keep ? &lc.ln2 : nullptr) : mid;
    Matrix pre_act = (m_in * lp.w1).rowwise() + lp.b1;
    Matrix act = pre_act.unaryExpr([](double z) { return gelu(z); });
    Matrix mlp_out = (act * lp.w2).rowwise() + lp.b2;
    if (drop) {
      Matrix m = dropout_mask(seq, config.hidden, config.dropout, *options.dropout_rng);
      mlp_out.array() *= m.array();
      if (keep) lc.mlp_drop = std::move(m);
    }
    Matrix out = mid + mlp_out;
    if (!pre) out = layer_norm(out, lp.ln2_gain, lp.ln2_bias, eps, keep ? &lc.ln2 : nullptr);

    if (keep) {
      lc.attn_in = std::move(a_in);
      lc.q = std::move(q);
      lc.k = std::move(k);
      lc.v = std::move(v);
      lc.context = std::move(context);
      lc.mid = mid;
      lc.mlp_in = std::move(m_in);
      lc.pre_act = std::move(pre_act);
      lc.act = std::move(act);
    }
    x = std::move(out);
    if (li + 1 < config.layers || !pre) trace.hidden_states.push_back(x);
  }

  if (pre) {
    if (keep) cache.stream_out = x;
    trace.hidden_states.push_back(
        layer_norm(x, params.outer_norm_gain, params.outer_norm_bias, eps, keep ? &cache.outer : nullptr));
  }

  if (options.compute_logits) {
    const Matrix& head = config.tied_head ? params.token_embedding : params.head_weight;
    trace.logits = (trace.hidden_states.back() * head.transpose()).rowwise() + params.head_bias;
  }
  return trace;
}

void accumulate_backward(const EncoderConfig& config, const ParameterSet& params, const ForwardTrace& trace,
                         const Matrix* d_logits, const Matrix* d_final_hidden, ParameterSet& grads) {
  const ForwardCache& cache = trace.cache;
  if (cache.layers.size() != static_cast<size_t>(config.layers)) {
    throw Error("accumulate_backward: trace was recorded without keep_cache");
  }
  const bool pre = config.norm_placement == NormPlacement::kPre;
  const Eigen::Index seq = static_cast<Eigen::Index>(cache.ids.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.head_size));
  const Matrix& final_hidden = trace.hidden_states.back();

  Matrix d_h = Matrix::Zero(seq, config.hidden);
  if (d_logits) {
    if (config.tied_head) {
      d_h.noalias() += *d_logits * params.token_embedding;
      grads.token_embedding.noalias() += d_logits->transpose() * final_hidden;
    } else {
      d_h.noalias() += *d_logits * params.head_weight;
      grads.head_weight.noalias() += d_logits->transpose() * final_hidden;
    }
    grads.head_bias += d_logits->colwise().sum();
  }
  if (d_final_hidden) d_h += *d_final_hidden;

  Matrix dx = pre ? layer_norm_backward(d_h, cache.outer, params.outer_norm_gain, grads.outer_norm_gain,
                                        grads.outer_norm_bias)
                  : d_h;

  for (int li = config.layers - 1; li >= 0; --li) {
    const LayerParams& lp = params.layers[static_cast<size_t>(li)];
    LayerParams& lg = grads.layers[static_cast<size_t>(li)];
    const LayerCache& lc = cache.layers[static_cast<size_t>(li)];

    // MLP sublayer.
    Matrix d_out = pre ? dx : layer_norm_backward(dx, lc.ln2, lp.ln2_gain, lg.ln2_gain, lg.ln2_bias);
    Matrix d_mlp = d_out;
    if (lc.mlp_drop.size() > 0) d_mlp.array() *= lc.mlp_drop.array();
    lg.w2.noalias() += lc.act.transpose() * d_mlp;
    lg.b2 += d_mlp.colwise().sum();
    Matrix d_pre_act = d_mlp * lp.w2.transpose();
    d_pre_act.array() *= lc.pre_act.unaryExpr([](double z) { return gelu_grad(z); }).array();
    lg.w1.noalias() += lc.mlp_in.transpose() * d_pre_act;
    lg.b1 += d_pre_act.colwise().sum();
    Matrix d_m_in = d_pre_act * lp.w1.transpose();
    Matrix d_mid = pre ? Matrix(d_out + layer_norm_backward(d_m_in, lc.ln2, lp.ln2_gain, lg.ln2_gain, lg.ln2_bias))
                       : Matrix(d_out + d_m_in);

    // Attention sublayer.
    Matrix d_res = pre ? d_mid : layer_norm_backward(d_mid, lc.ln1, lp.ln1_gain, lg.ln1_gain, lg.ln1_bias);
    Matrix d_attn = d_res;
    if (lc.attn_drop.size() > 0) d_attn.array() *= lc.attn_drop.array();
    lg.wo.noalias() += lc.context.transpose() * d_attn;
    lg.bo += d_attn.colwise().sum();
    Matrix d_context = d_attn * lp.wo.transpose();
    Matrix dq(seq, config.hidden), dk(seq, config.hidden), dv(seq, config.hidden);
    for (int h = 0; h < config.heads; ++h) {
      const Eigen::Index off = static_cast<Eigen::Index>(h) * config.head_size;
      const Matrix& p = lc.probs[static_cast<size_t>(h)];
      const auto d_ctx_h = d_context.middleCols(off, config.head_size);
      Matrix d_p = d_ctx_h * lc.v.middleCols(off, config.head_size).transpose();
      dv.middleCols(off, config.head_size) = p.transpose() * d_ctx_h;
      const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
      Matrix d_s = (p.array() * (d_p.colwise() - row_dot).array()) * scale;
      dq.middleCols(off, config.head_size) = d_s * lc.k.middleCols(off, config.head_size);
      dk.middleCols(off, config.head_size) = d_s.transpose() * lc.q.middleCols(off, config.head_size);
    }
    lg.wq.noalias() += lc.attn_in.transpose() * dq;
    lg.wk.noalias() += lc.attn_in.transpose() * dk;
    lg.wv.noalias() += lc.attn_in.transpose() * dv;
    lg.bq += dq.colwise().sum();
    lg.bk += dk.colwise().sum();
    lg.bv += dv.colwise().sum();
    Matrix d_a_in = dq * lp.wq.transpose() + dk * lp.wk.transpose() + dv * lp.wv.transpose();
    dx = pre ? Matrix(d_res + layer_norm_backward(d_a_in, lc.ln1, lp.ln1_gain, lg.ln1_gain, lg.ln1_bias))
             : Matrix(d_res + d_a_in);
  }

  if (cache.embed_drop.size() > 0) dx.array() *= cache.embed_drop.array();
  if (!pre) dx = layer_norm_backward(dx, cache.outer, params.outer_norm_gain, grads.outer_norm_gain, grads.outer_norm_bias);
  for (Eigen::Index t = 0; t < seq; ++t) {
    grads.token_embedding.row(cache.ids[static_cast<size_t>(t)]) += dx.row(t);
    grads.position_embedding.row(t) += dx.row(t);
  }
}

}  // namespace codescale
