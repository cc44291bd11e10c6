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

// Independent reference implementations used as test oracles. They share no
// code with the library beyond its public data types.
#pragma once

#include <algorithm>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "codescale/model.hpp"

namespace codescale::oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const Matrix& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) g[r][c] = m(r, c);
  }
  return g;
}

inline Grid matmul(const Grid& a, const Matrix& w) {
  Grid out(a.size(), std::vector<double>(w.cols(), 0.0));
  for (size_t i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a[i].size(); ++k) s += a[i][k] * w(static_cast<Eigen::Index>(k), j);
      out[i][j] = s;
    }
  }
  return out;
}

inline void add_bias(Grid& a, const RowVector& b) {
  for (auto& row : a) {
    for (size_t j = 0; j < row.size(); ++j) row[j] += b(static_cast<Eigen::Index>(j));
  }
}

inline Grid add(const Grid& a, const Grid& b) {
  Grid out = a;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
  }
  return out;
}

inline Grid layer_norm(const Grid& x, const RowVector& gain, const RowVector& bias, double eps) {
  Grid out = x;
  for (size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mean = 0.0;
    for (double v : x[i]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= n;
    for (size_t j = 0; j < x[i].size(); ++j) {
      out[i][j] = (x[i][j] - mean) / std::sqrt(var + eps) * gain(static_cast<Eigen::Index>(j)) +
                  bias(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

struct Forward {
  std::vector<Grid> hidden;  // layers + 1
  Grid logits;
};

/// Straight-line encoder forward pass (no dropout).
inline Forward forward(const EncoderConfig& c, const ParameterSet& p, const std::vector<int32_t>& ids,
                       const std::vector<uint8_t>& pad) {
  const size_t n = ids.size();
  const bool pre = c.norm_placement == NormPlacement::kPre;
  Grid x(n, std::vector<double>(c.hidden));
  for (size_t t = 0; t < n; ++t) {
    for (int j = 0; j < c.hidden; ++j) x[t][j] = p.token_embedding(ids[t], j) + p.position_embedding(t, j);
  }
  if (!pre) x = layer_norm(x, p.outer_norm_gain, p.outer_norm_bias, c.layer_norm_eps);
  Forward f;
  f.hidden.push_back(x);
  for (int l = 0; l < c.layers; ++l) {
    const LayerParams& lp = p.layers[l];
    const Grid a_in = pre ? layer_norm(x, lp.ln1_gain, lp.ln1_bias, c.layer_norm_eps) : x;
    Grid q = matmul(a_in, lp.wq), k = matmul(a_in, lp.wk), v = matmul(a_in, lp.wv);
    add_bias(q, lp.bq);
    add_bias(k, lp.bk);
    add_bias(v, lp.bv);
    Grid ctx(n, std::vector<double>(c.hidden, 0.0));
    for (int h = 0; h < c.heads; ++h) {
      const int off = h * c.head_size;
      for (size_t i = 0; i < n; ++i) {
        std::vector<double> w(n, 0.0);
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < n; ++j) {
          if (pad[j]) continue;
          double s = 0.0;
          for (int d = 0; d < c.head_size; ++d) s += q[i][off + d] * k[j][off + d];
          w[j] = s / std::sqrt(static_cast<double>(c.head_size));
          mx = std::max(mx, w[j]);
        }
        double z = 0.0;
        for (size_t j = 0; j < n; ++j) {
          w[j] = pad[j] ? 0.0 : std::exp(w[j] - mx);
          z += w[j];
        }
        for (size_t j = 0; j < n; ++j) {
          for (int d = 0; d < c.head_size; ++d) ctx[i][off + d] += w[j] / z * v[j][off + d];
        }
      }
    }
    Grid attn = matmul(ctx, lp.wo);
    add_bias(attn, lp.bo);
    Grid mid = add(x, attn);
    if (!pre) mid = layer_norm(mid, lp.ln1_gain, lp.ln1_bias, c.layer_norm_eps);
    const Grid m_in = pre ? layer_norm(mid, lp.ln2_gain, lp.ln2_bias, c.layer_norm_eps) : mid;
    Grid hid = matmul(m_in, lp.w1);
    add_bias(hid, lp.b1);
    for (auto& row : hid) {
      for (double& v2 : row) v2 = gelu(v2);
    }
    Grid mlp = matmul(hid, lp.w2);
    add_bias(mlp, lp.b2);
    x = add(mid, mlp);
    if (!pre) x = layer_norm(x, lp.ln2_gain, lp.ln2_bias, c.layer_norm_eps);
    if (!pre || l + 1 < c.layers) f.hidden.push_back(x);
  }
  if (pre) f.hidden.push_back(layer_norm(x, p.outer_norm_gain, p.outer_norm_bias, c.layer_norm_eps));
  const Matrix& head = c.tied_head ? p.token_embedding : p.head_weight;
  const Grid& last = f.hidden.back();
  f.logits.assign(n, std::vector<double>(c.vocab, 0.0));
  for (size_t t = 0; t < n; ++t) {
    for (int v2 = 0; v2 < c.vocab; ++v2) {
      double s = p.head_bias(v2);
      for (int j = 0; j < c.hidden; ++j) s += last[t][j] * head(v2, j);
      f.logits[t][v2] = s;
    }
  }
  return f;
}

/// Reference BPE trainer: recounts every adjacent pair from scratch at each
/// merge. Returns merges as byte strings.
inline std::vector<std::pair<std::string, std::string>> bpe_merges(const std::vector<std::string>& docs,
                                                                   size_t merges_wanted) {
  std::vector<std::vector<std::string>> units;
  for (const auto& d : docs) {
    std::vector<std::string> u;
    for (char ch : d) u.emplace_back(1, ch);
    units.push_back(std::move(u));
  }
  std::vector<std::pair<std::string, std::string>> out;
  while (out.size() < merges_wanted) {
    std::map<std::pair<std::string, std::string>, size_t> counts;
    for (const auto& u : units) {
      for (size_t i = 0; i + 1 < u.size(); ++i) ++counts[{u[i], u[i + 1]}];
    }
    const std::pair<std::string, std::string>* best = nullptr;
    size_t best_count = 0;
    for (const auto& [pair, count] : counts) {  // map order = lexicographic tie-break
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (!best || best_count < 2) break;
    const auto merge = *best;
    out.push_back(merge);
    for (auto& u : units) {
      std::vector<std::string> next;
      for (size_t i = 0; i < u.size(); ++i) {
        if (i + 1 < u.size() && u[i] == merge.first && u[i + 1] == merge.second) {
          next.push_back(merge.first + merge.second);
          ++i;
        } else {
          next.push_back(u[i]);
        }
      }
      u = std::move(next);
    }
  }
  return out;
}

/// MRR by sorting each row (stable on index) and scanning for gold.
inline double mrr(const Grid& scores, const std::vector<size_t>& gold) {
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    std::vector<size_t> order(scores[i].size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return scores[i][a] != scores[i][b] ? scores[i][a] > scores[i][b] : a < b;
    });
    for (size_t r = 0; r < order.size(); ++r) {
      if (order[r] == gold[i]) {
        total += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(scores.size());
}

/// MAP@R by enumerating the ranking of every query directly.
inline double map_at_r(const Grid& scores, const std::vector<int>& labels) {
  double total = 0.0;
  size_t used = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    size_t r = 0;
    for (size_t j = 0; j < labels.size(); ++j) r += (j != i && labels[j] == labels[i]);
    if (r == 0) continue;
    std::vector<size_t> order;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return scores[i][a] != scores[i][b] ? scores[i][a] > scores[i][b] : a < b;
    });
    double ap = 0.0;
    for (size_t k = 0; k < r; ++k) {
      if (labels[order[k]] != labels[i]) continue;
      size_t hits = 0;
      for (size_t m = 0; m <= k; ++m) hits += labels[order[m]] == labels[i];
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    total += ap / static_cast<double>(r);
    ++used;
  }
  return total / static_cast<double>(used);
}

/// Dense grid search for (alpha, k) minimizing squared log-space error.
struct GridFit {
  double alpha = 0.0;
  double k = 0.0;
  double sse = 0.0;
};

inline double log_sse(const std::vector<double>& x, const std::vector<double>& e, double alpha, double k) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(e[i]) - (std::log(k) - alpha * std::log(x[i]));
    s += r * r;
  }
  return s;
}

inline GridFit grid_search(const std::vector<double>& x, const std::vector<double>& e, int alpha_steps, int k_steps) {
  GridFit best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int a = 0; a <= alpha_steps; ++a) {
    const double alpha = static_cast<double>(a) / alpha_steps;
    for (int b = 0; b <= k_steps; ++b) {
      // k on a log grid over [0.1, 10].
      const double k = 0.1 * std::pow(100.0, static_cast<double>(b) / k_steps);
      const double s = log_sse(x, e, alpha, k);
      if (s < best.sse) best = {alpha, k, s};
    }
  }
  return best;
}

/// Joint confidence region of (alpha, k) traced on the grid: every grid point
/// whose SSE stays below sse_min * (1 + p / (n - p) * F) with p = 2. `f_crit`
/// is the F(2, n - 2) quantile for the chosen level.
struct GridRegion {
  double alpha_lo = 0.0, alpha_hi = 0.0;
  double k_lo = 0.0, k_hi = 0.0;
  double sse_min = 0.0, threshold = 0.0;
  double alpha_step = 0.0, k_ratio = 0.0;  // grid spacing
  size_t members = 0;
};

inline GridRegion grid_region(const std::vector<double>& x, const std::vector<double>& e, int alpha_steps,
                              int k_steps, double f_crit) {
  const GridFit best = grid_search(x, e, alpha_steps, k_steps);
  GridRegion r;
  r.sse_min = best.sse;
  const double n = static_cast<double>(x.size());
  r.threshold = best.sse * (1.0 + 2.0 / (n - 2.0) * f_crit);
  r.alpha_step = 1.0 / alpha_steps;
  r.k_ratio = std::pow(100.0, 1.0 / k_steps);
  r.alpha_lo = r.k_lo = std::numeric_limits<double>::infinity();
  r.alpha_hi = r.k_hi = -std::numeric_limits<double>::infinity();
  for (int a = 0; a <= alpha_steps; ++a) {
    const double alpha = static_cast<double>(a) / alpha_steps;
    for (int b = 0; b <= k_steps; ++b) {
      const double k = 0.1 * std::pow(100.0, static_cast<double>(b) / k_steps);
      if (log_sse(x, e, alpha, k) > r.threshold) continue;
      ++r.members;
      r.alpha_lo = std::min(r.alpha_lo, alpha);
      r.alpha_hi = std::max(r.alpha_hi, alpha);
      r.k_lo = std::min(r.k_lo, k);
      r.k_hi = std::max(r.k_hi, k);
    }
  }
  return r;
}

/// True when (alpha, k) falls inside the region's bounding box widened by one
/// grid cell and its SSE is under the region threshold.
inline bool in_region(const GridRegion& r, const std::vector<double>& x, const std::vector<double>& e, double alpha,
                      double k) {
  return r.members > 0 && alpha >= r.alpha_lo - r.alpha_step && alpha <= r.alpha_hi + r.alpha_step &&
         k >= r.k_lo / r.k_ratio && k <= r.k_hi * r.k_ratio && log_sse(x, e, alpha, k) <= r.threshold;
}

/// 95% quantile of F(2, 6), for eight-point fits.
inline constexpr double kF95_2_6 = 5.14325284978472;

}  // namespace codescale::oracle
