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

#include "codescale/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "codescale/common.hpp"

namespace codescale {

RowVector mean_pool(const Matrix& hidden, const PadMask& pad) {
  if (pad.size() != static_cast<size_t>(hidden.rows())) throw Error("mean_pool: pad mask length mismatch");
  RowVector sum = RowVector::Zero(hidden.cols());
  size_t count = 0;
  for (Eigen::Index t = 0; t < hidden.rows(); ++t) {
    if (pad[t]) continue;
    sum += hidden.row(t);
    ++count;
  }
  if (count == 0) throw Error("mean_pool: sequence is all padding");
  return sum / static_cast<double>(count);
}

Embedding embed(const EncoderConfig& config, const ParameterSet& params, std::span<const int32_t> ids,
                const PadMask& pad) {
  if (std::all_of(pad.begin(), pad.end(), [](uint8_t p) { return p != 0; })) {
    throw Error("embed: sequence is all padding");
  }
  ForwardOptions options;
  options.compute_logits = false;
  const ForwardTrace trace = forward(config, params, ids, pad, options);
  const RowVector pooled = mean_pool(trace.hidden_states.back(), pad);
  const double norm = pooled.norm();
  if (!(norm > 0.0)) throw Error("embed: pooled vector has zero norm");
  return pooled / norm;
}

Embedding embed(const EncoderConfig& config, const ParameterSet& params, const Sequence& sequence) {
  return embed(config, params, sequence.ids, pad_mask_for_length(sequence.ids.size(), sequence.length));
}

Matrix embed_all(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences) {
  Matrix out(static_cast<Eigen::Index>(sequences.size()), config.hidden);
  parallel_for(sequences.size(), [&](size_t i) { out.row(i) = embed(config, params, sequences[i]); });
  return out;
}

Sequence encode_text(const TokenizerModel& tokenizer, std::string_view text, size_t window) {
  if (window < 2) throw Error("encode_text: window must be at least 2");
  std::vector<int32_t> ids = tokenizer.encode(text, true);
  if (ids.size() > window) {
    ids.resize(window);
    ids.back() = tokenizer.special().sep;
  }
  Sequence seq;
  seq.length = ids.size();
  ids.resize(window, tokenizer.special().pad);
  seq.ids = std::move(ids);
  return seq;
}

Matrix score_matrix(const Matrix& queries, const Matrix& docs) {
  if (queries.cols() != docs.cols()) {
    throw Error("score_matrix: query width " + std::to_string(queries.cols()) + " != document width " +
                std::to_string(docs.cols()));
  }
  return queries * docs.transpose();
}

double contrastive_loss(const Matrix& scores, double temperature, Matrix* d_scores) {
  if (scores.rows() != scores.cols()) throw Error("contrastive_loss: score matrix must be square");
  if (scores.rows() < 2) throw Error("contrastive_loss: a batch needs at least 2 pairs for negatives");
  if (!(temperature > 0.0)) throw Error("contrastive_loss: temperature must be positive");
  const Eigen::Index n = scores.rows();
  double loss = 0.0;
  if (d_scores) d_scores->resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowVector z = scores.row(i) / temperature;
    const double mx = z.maxCoeff();
    const RowVector ex = (z.array() - mx).exp().matrix();
    const double sum = ex.sum();
    loss += std::log(sum) + mx - z(i);
    if (d_scores) {
      RowVector g = ex / sum;
      g(i) -= 1.0;
      d_scores->row(i) = g / (temperature * static_cast<double>(n));
    }
  }
  return loss / static_cast<double>(n);
}

namespace {

// Gradient through e = u / |u|, u = mean over non-pad rows, into every row.
Matrix embedding_backward(const RowVector& pooled, const RowVector& d_embedding, const PadMask& pad) {
  const double norm = pooled.norm();
  const RowVector e = pooled / norm;
  const RowVector d_pooled = (d_embedding - e * e.dot(d_embedding)) / norm;
  const double count = static_cast<double>(std::count(pad.begin(), pad.end(), uint8_t{0}));
  Matrix d_hidden = Matrix::Zero(static_cast<Eigen::Index>(pad.size()), pooled.cols());
  for (size_t t = 0; t < pad.size(); ++t) {
    if (!pad[t]) d_hidden.row(t) = d_pooled / count;
  }
  return d_hidden;
}

struct Encoded {
  ForwardTrace trace;
  PadMask pad;
  RowVector pooled;
  RowVector embedding;
};

Encoded encode_with_cache(const EncoderConfig& config, const ParameterSet& params, const Sequence& seq) {
  Encoded out;
  out.pad = pad_mask_for_length(seq.ids.size(), seq.length);
  ForwardOptions options;
  options.keep_cache = true;
  options.compute_logits = false;
  out.trace = forward(config, params, seq.ids, out.pad, options);
  out.pooled = mean_pool(out.trace.hidden_states.back(), out.pad);
  out.embedding = out.pooled / out.pooled.norm();
  return out;
}

}  // namespace

FinetuneResult finetune_contrastive(const EncoderConfig& config, const ParameterSet& params,
                                    std::span<const EncodedPair> pairs, const FinetuneConfig& finetune) {
  const TrainConfig& tc = finetune.train;
  tc.validate();
  if (tc.batch_size < 2) throw Error("finetune_contrastive: batch size must be at least 2 (no negatives)");
  if (pairs.size() < 2) throw Error("finetune_contrastive: need at least 2 pairs");
  const size_t batch = std::min(tc.batch_size, pairs.size());

  FinetuneResult result{params, {}};
  AdamState adam = AdamState::zeros(config);
  DataOrder order(pairs.size(), tc.seed);
  uint64_t consumed = 0;
  for (uint64_t step = 1; step <= tc.total_steps; ++step) {
    // Draw distinct pairs; an epoch boundary inside a batch could repeat one.
    std::vector<size_t> picks;
    while (picks.size() < batch) {
      const size_t idx = order.at(consumed++);
      if (std::find(picks.begin(), picks.end(), idx) == picks.end()) picks.push_back(idx);
    }
    std::vector<Encoded> queries(batch), docs(batch);
    parallel_for(2 * batch, [&](size_t k) {
      if (k < batch) {
        queries[k] = encode_with_cache(config, result.params, pairs[picks[k]].query);
      } else {
        docs[k - batch] = encode_with_cache(config, result.params, pairs[picks[k - batch]].document);
      }
    });
    Matrix q(batch, config.hidden), d(batch, config.hidden);
    for (size_t i = 0; i < batch; ++i) {
      q.row(i) = queries[i].embedding;
      d.row(i) = docs[i].embedding;
    }
    Matrix d_scores;
    const double loss = contrastive_loss(score_matrix(q, d), finetune.temperature, &d_scores);
    if (!std::isfinite(loss)) throw NonFiniteLossError(step, "finetune_contrastive: non-finite loss at step " + std::to_string(step));
    const Matrix d_q = d_scores * d;
    const Matrix d_d = d_scores.transpose() * q;

    std::vector<ParameterSet> partial(2 * batch);
    parallel_for(2 * batch, [&](size_t k) {
      partial[k] = ParameterSet::zeros(config);
      const Encoded& enc = k < batch ? queries[k] : docs[k - batch];
      const RowVector grad = k < batch ? RowVector(d_q.row(k)) : RowVector(d_d.row(k - batch));
      const Matrix d_hidden = embedding_backward(enc.pooled, grad, enc.pad);
      accumulate_backward(config, result.params, enc.trace, nullptr, &d_hidden, partial[k]);
    });
    ParameterSet grads = ParameterSet::zeros(config);
    for (const auto& p : partial) grads.add(p);
    adamw_step(result.params, grads, adam, lr_at(tc, step), tc);
    result.losses.push_back(loss);
  }
  return result;
}

namespace {

// Ranking of candidates by descending score; ties go to the lower index.
std::vector<Eigen::Index> ranking(const Matrix& scores, Eigen::Index row) {
  std::vector<Eigen::Index> order(scores.cols());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores(row, a) > scores(row, b); });
  return order;
}

void check_labels(const Matrix& scores, std::span<const int> labels, const char* who) {
  if (scores.rows() != scores.cols() || static_cast<size_t>(scores.rows()) != labels.size()) {
    throw Error(std::string(who) + ": expects a square score matrix with one label per item");
  }
}

template <typename PerQuery>
double average_over_queries(const Matrix& scores, std::span<const int> labels, const char* who, PerQuery per_query) {
  check_labels(scores, labels, who);
  std::map<int, size_t> class_size;
  for (int l : labels) ++class_size[l];
  double total = 0.0;
  size_t used = 0;
  size_t skipped = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const size_t r = class_size[labels[i]] - 1;
    if (r == 0) {
      ++skipped;
      continue;
    }
    std::vector<Eigen::Index> order = ranking(scores, i);
    order.erase(std::find(order.begin(), order.end(), i));
    total += per_query(order, labels[i], r);
    ++used;
  }
  if (skipped > 0) log_warn(std::string(who) + ": skipped " + std::to_string(skipped) + " singleton-class queries");
  if (used == 0) throw Error(std::string(who) + ": no query has another member of its class");
  return total / static_cast<double>(used);
}

}  // namespace

double mrr(const Matrix& scores, std::span<const size_t> gold) {
  if (static_cast<size_t>(scores.rows()) != gold.size()) throw Error("mrr: one gold index per query required");
  if (gold.empty()) throw Error("mrr: no queries");
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const size_t g = gold[i];
    if (g >= static_cast<size_t>(scores.cols())) {
      throw Error("mrr: gold index " + std::to_string(g) + " of query " + std::to_string(i) + " is out of range");
    }
    const double s = scores(i, g);
    size_t rank = 1;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) > s || (scores(i, j) == s && static_cast<size_t>(j) < g)) ++rank;
    }
    total += 1.0 / static_cast<double>(rank);
  }
  return total / static_cast<double>(scores.rows());
}

double map_at_r(const Matrix& scores, std::span<const int> labels) {
  return average_over_queries(scores, labels, "map_at_r",
                              [&](const std::vector<Eigen::Index>& order, int label, size_t r) {
                                double sum = 0.0;
                                size_t hits = 0;
                                for (size_t k = 0; k < r; ++k) {
                                  if (labels[order[k]] != label) continue;
                                  ++hits;
                                  sum += static_cast<double>(hits) / static_cast<double>(k + 1);
                                }
                                return sum / static_cast<double>(r);
                              });
}

double mean_average_precision(const Matrix& scores, std::span<const int> labels) {
  return average_over_queries(scores, labels, "mean_average_precision",
                              [&](const std::vector<Eigen::Index>& order, int label, size_t r) {
                                double sum = 0.0;
                                size_t hits = 0;
                                for (size_t k = 0; k < order.size() && hits < r; ++k) {
                                  if (labels[order[k]] != label) continue;
                                  ++hits;
                                  sum += static_cast<double>(hits) / static_cast<double>(k + 1);
                                }
                                return sum / static_cast<double>(r);
                              });
}

SearchSet synth_search_set(size_t n, uint64_t seed, const std::string& language) {
  SearchSet set;
  set.candidates.provenance = "synth-search " + language;
  set.candidates.seed = seed;
  for (size_t i = 0; i < n; ++i) {
    const SynthSnippet s = synth_snippet(language, mix_seed(seed, i, 1), mix_seed(seed, i, 2));
    set.candidates.documents.push_back({language, s.code, i});
    set.pairs.push_back({s.summary, i});
  }
  return set;
}

std::vector<PoolItem> synth_clone_pool(size_t classes, size_t per_class, uint64_t seed, bool mixed_languages) {
  const auto& languages = synth_languages();
  std::vector<PoolItem> pool;
  for (size_t c = 0; c < classes; ++c) {
    const uint64_t structure = mix_seed(seed, c, 3);
    for (size_t m = 0; m < per_class; ++m) {
      const std::string& lang = mixed_languages ? languages[(c + m) % languages.size()] : std::string("java");
      pool.push_back({synth_snippet(lang, structure, mix_seed(seed, c * per_class + m, 4)).code, static_cast<int>(c)});
    }
  }
  return pool;
}

namespace {

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn fn) {
  std::istringstream in(read_file(path));
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace

void write_pairs(const std::vector<RetrievalPair>& pairs, const std::filesystem::path& path) {
  std::string out;
  for (const auto& p : pairs) out += nlohmann::json{{"query", p.query}, {"positive_id", p.positive_id}}.dump() + "\n";
  write_file_atomic(path, out);
}

std::vector<RetrievalPair> read_pairs(const std::filesystem::path& path) {
  std::vector<RetrievalPair> pairs;
  for_each_record(path, [&](const nlohmann::json& j) {
    pairs.push_back({j.at("query").get<std::string>(), j.at("positive_id").get<uint64_t>()});
  });
  if (pairs.empty()) throw Error(path.string() + ": no pairs");
  return pairs;
}

void write_pool(const std::vector<PoolItem>& pool, const std::filesystem::path& path) {
  std::string out;
  for (const auto& p : pool) out += nlohmann::json{{"content", p.content}, {"class_id", p.class_id}}.dump() + "\n";
  write_file_atomic(path, out);
}

std::vector<PoolItem> read_pool(const std::filesystem::path& path) {
  std::vector<PoolItem> pool;
  for_each_record(path, [&](const nlohmann::json& j) {
    pool.push_back({j.at("content").get<std::string>(), j.at("class_id").get<int>()});
  });
  if (pool.empty()) throw Error(path.string() + ": empty pool");
  return pool;
}

std::vector<size_t> gold_indices(const Corpus& candidates, std::span<const RetrievalPair> pairs) {
  std::unordered_map<uint64_t, size_t> index;
  for (size_t i = 0; i < candidates.size(); ++i) index.emplace(candidates.documents[i].id, i);
  std::vector<size_t> gold;
  for (const auto& p : pairs) {
    auto it = index.find(p.positive_id);
    if (it == index.end()) throw Error("positive id " + std::to_string(p.positive_id) + " is not in the candidate pool");
    gold.push_back(it->second);
  }
  return gold;
}

}  // namespace codescale
