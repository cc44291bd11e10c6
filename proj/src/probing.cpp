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

#include "codescale/probing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "codescale/common.hpp"
#include "codescale/plot.hpp"
#include "codescale/retrieval.hpp"

namespace codescale {

std::string to_string(ProbeTask task) {
  switch (task) {
    case ProbeTask::kLen: return "len";
    case ProbeTask::kAst: return "ast";
    case ProbeTask::kCpx: return "cpx";
    case ProbeTask::kTyp: return "typ";
  }
  return "?";
}

ProbeTask parse_probe_task(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "len") return ProbeTask::kLen;
  if (lower == "ast") return ProbeTask::kAst;
  if (lower == "cpx") return ProbeTask::kCpx;
  if (lower == "typ") return ProbeTask::kTyp;
  throw Error("probe task must be len, ast, cpx or typ; got '" + text + "'");
}

size_t class_count(ProbeTask task) {
  switch (task) {
    case ProbeTask::kLen: return 5;
    case ProbeTask::kAst: return 20;
    case ProbeTask::kCpx: return 10;
    case ProbeTask::kTyp: return 2;
  }
  return 0;
}

std::vector<int> ProbeDataset::labels() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.label);
  return out;
}

std::vector<size_t> ProbeDataset::histogram() const {
  std::vector<size_t> counts(class_count, 0);
  for (const auto& item : items) {
    if (item.label >= 0 && static_cast<size_t>(item.label) < class_count) ++counts[item.label];
  }
  return counts;
}

void ProbeDataset::validate() const {
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].label < 0 || static_cast<size_t>(items[i].label) >= class_count) {
      throw Error("probe item " + std::to_string(i) + ": label " + std::to_string(items[i].label) +
                  " outside [0, " + std::to_string(class_count) + ")");
    }
  }
}

bool ProbeDataset::balanced(double tolerance) const {
  const auto counts = histogram();
  if (counts.empty()) return false;
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return static_cast<double>(*hi - *lo) <= tolerance * static_cast<double>(*hi);
}

ProbeDataset read_probe_dataset(const std::filesystem::path& path, ProbeTask task) {
  ProbeDataset dataset{task, class_count(task), {}};
  std::istringstream in(read_file(path));
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      dataset.items.push_back({j.at("content").get<std::string>(), j.at("label").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  if (dataset.items.empty()) throw Error(path.string() + ": no probe items");
  dataset.validate();
  return dataset;
}

void write_probe_dataset(const ProbeDataset& dataset, const std::filesystem::path& path) {
  std::string out;
  for (const auto& item : dataset.items) {
    out += nlohmann::json{{"content", item.content}, {"label", item.label}}.dump() + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<Sequence> encode_dataset(const TokenizerModel& tokenizer, const ProbeDataset& dataset, size_t window) {
  std::vector<Sequence> out(dataset.items.size());
  parallel_for(out.size(), [&](size_t i) { out[i] = encode_text(tokenizer, dataset.items[i].content, window); });
  return out;
}

std::vector<Matrix> extract_all_layers(const EncoderConfig& config, const ParameterSet& params,
                                       std::span<const Sequence> sequences) {
  const auto n = static_cast<Eigen::Index>(sequences.size());
  std::vector<Matrix> out(config.layers + 1, Matrix(n, config.hidden));
  parallel_for(sequences.size(), [&](size_t i) {
    const PadMask pad = pad_mask_for_length(sequences[i].ids.size(), sequences[i].length);
    ForwardOptions options;
    options.compute_logits = false;
    const ForwardTrace trace = forward(config, params, sequences[i].ids, pad, options);
    for (size_t l = 0; l < trace.hidden_states.size(); ++l) out[l].row(i) = mean_pool(trace.hidden_states[l], pad);
  });
  return out;
}

Matrix extract_features(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences,
                        int layer) {
  if (layer < 0 || layer > config.layers) {
    throw Error("extract_features: layer " + std::to_string(layer) + " outside [0, " + std::to_string(config.layers) +
                "]");
  }
  return extract_all_layers(config, params, sequences)[layer];
}

LinearProbe train_probe(const Matrix& features, std::span<const int> labels, size_t class_count, uint64_t seed,
                        const ProbeTrainConfig& options) {
  const Eigen::Index n = features.rows();
  const Eigen::Index h = features.cols();
  const auto c = static_cast<Eigen::Index>(class_count);
  if (static_cast<size_t>(n) != labels.size()) throw Error("train_probe: one label per feature row required");
  if (n == 0) throw Error("train_probe: no training items");
  std::vector<size_t> seen(class_count, 0);
  for (int l : labels) {
    if (l < 0 || l >= c) throw Error("train_probe: label " + std::to_string(l) + " out of range");
    ++seen[l];
  }
  if (std::count_if(seen.begin(), seen.end(), [](size_t k) { return k > 0; }) < 2) {
    throw Error("train_probe: labels contain a single class");
  }

  const RowVector mean = features.colwise().mean();
  RowVector scale = ((features.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index j = 0; j < h; ++j) {
    if (!(scale(j) > 1e-12)) scale(j) = 1.0;
  }
  const Matrix x = ((features.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  Matrix y = Matrix::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) y(i, labels[i]) = 1.0;

  Rng rng(seed);
  Matrix w(c, h);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = 0.01 * rng.normal();
  RowVector b = RowVector::Zero(c);

  auto evaluate = [&](Matrix* g) {
    Matrix z = (x * w.transpose()).rowwise() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = z.row(i).maxCoeff();
      z.row(i) = (z.row(i).array() - mx).exp();
      const double sum = z.row(i).sum();
      z.row(i) /= sum;
      loss -= std::log(std::max(z(i, labels[i]), 1e-300));
    }
    if (g) *g = (z - y) / static_cast<double>(n);
    return loss / static_cast<double>(n) + 0.5 * options.l2 * w.squaredNorm();
  };

  LinearProbe probe;
  Matrix g;
  probe.initial_loss = evaluate(&g);
  for (size_t it = 0; it < options.max_iterations; ++it) {
    const Matrix dw = g.transpose() * x + options.l2 * w;
    const RowVector db = g.colwise().sum();
    if (std::max(dw.cwiseAbs().maxCoeff(), db.cwiseAbs().maxCoeff()) < options.tolerance) {
      probe.converged = true;
      break;
    }
    w -= options.learning_rate * dw;
    b -= options.learning_rate * db;
    ++probe.iterations;
    probe.final_loss = evaluate(&g);
  }
  if (probe.iterations == 0) probe.final_loss = probe.initial_loss;

  // Fold the standardization into raw-feature weights.
  probe.weight = (w.array().rowwise() / scale.array()).matrix();
  probe.bias = b - (probe.weight * mean.transpose()).transpose();
  return probe;
}

std::vector<int> probe_predict(const LinearProbe& probe, const Matrix& features) {
  if (features.cols() != probe.weight.cols()) throw Error("probe_predict: feature width does not match the probe");
  const Matrix z = (features * probe.weight.transpose()).rowwise() + probe.bias;
  std::vector<int> out(features.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < z.cols(); ++k) {
      if (z(i, k) > z(i, best)) best = k;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

double probe_accuracy(const LinearProbe& probe, const Matrix& features, std::span<const int> labels) {
  if (static_cast<size_t>(features.rows()) != labels.size()) throw Error("probe_accuracy: one label per row required");
  if (labels.empty()) return 0.0;
  const auto predicted = probe_predict(probe, features);
  size_t hits = 0;
  for (size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

IndexSplit probe_split(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(mix_seed(seed, 0x73706c6974ULL));
  rng.shuffle(std::span<size_t>(order));
  const auto n_train = static_cast<size_t>(std::llround(0.8 * static_cast<double>(n)));
  IndexSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Matrix select_rows(const Matrix& m, std::span<const size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

std::vector<int> select_labels(std::span<const int> labels, std::span<const size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(labels[r]);
  return out;
}

std::string LayerSweep::to_csv() const {
  std::string out = "layer,train_acc,test_acc\n";
  char buf[96];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", r.layer, r.train_accuracy, r.test_accuracy);
    out += buf;
  }
  return out;
}

std::string LayerSweep::to_svg(const std::string& title) const {
  SvgPlot::Series train{"train", {}, {}, true, "#1f77b4"};
  SvgPlot::Series test{"test", {}, {}, true, "#d62728"};
  for (const auto& r : results) {
    train.x.push_back(r.layer);
    train.y.push_back(r.train_accuracy);
    test.x.push_back(r.layer);
    test.y.push_back(r.test_accuracy);
  }
  SvgPlot plot(title, "hidden layer", "probe accuracy");
  plot.add(std::move(train)).add(std::move(test));
  return plot.render();
}

LayerSweep layer_sweep(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences,
                       std::span<const int> labels, size_t class_count, uint64_t seed,
                       const ProbeTrainConfig& options) {
  if (sequences.size() != labels.size()) throw Error("layer_sweep: one label per sequence required");
  const auto layers = extract_all_layers(config, params, sequences);
  const IndexSplit split = probe_split(sequences.size(), seed);
  const auto train_labels = select_labels(labels, split.train);
  const auto test_labels = select_labels(labels, split.test);
  LayerSweep sweep;
  sweep.results.resize(layers.size());
  parallel_for(layers.size(), [&](size_t l) {
    const Matrix train_x = select_rows(layers[l], split.train);
    const Matrix test_x = select_rows(layers[l], split.test);
    LinearProbe probe = train_probe(train_x, train_labels, class_count, seed, options);
    probe.layer = static_cast<int>(l);
    sweep.results[l] = {static_cast<int>(l), probe_accuracy(probe, train_x, train_labels),
                        probe_accuracy(probe, test_x, test_labels)};
  });
  return sweep;
}

int len_class(size_t tokens, const std::vector<size_t>& edges) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), tokens) - edges.begin());
}

ProbeDataset gen_len_labels(const Corpus& corpus, const TokenizerModel& tokenizer, const std::vector<size_t>& edges,
                            uint64_t seed, size_t max_items) {
  if (corpus.empty()) throw Error("gen_len_labels: corpus is empty");
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error("gen_len_labels: edges must be strictly increasing");
  }
  const size_t classes = edges.size() + 1;
  std::vector<int> label(corpus.size());
  parallel_for(corpus.size(), [&](size_t i) {
    label[i] = len_class(tokenizer.encode(corpus.documents[i].content).size(), edges);
  });
  std::vector<std::vector<size_t>> by_class(classes);
  for (size_t i = 0; i < corpus.size(); ++i) by_class[label[i]].push_back(i);
  size_t per_class = max_items / classes;
  for (size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) {
      throw Error("gen_len_labels: length bin " + std::to_string(c) + " has no documents; " +
                  std::to_string(classes) + " populated bins are required");
    }
    per_class = std::min(per_class, by_class[c].size());
  }
  if (per_class == 0) throw Error("gen_len_labels: max_items is smaller than the class count");
  std::vector<size_t> chosen;
  for (size_t c = 0; c < classes; ++c) {
    Rng rng(mix_seed(seed, c, 0x6c656e));
    rng.shuffle(std::span<size_t>(by_class[c]));
    chosen.insert(chosen.end(), by_class[c].begin(), by_class[c].begin() + per_class);
  }
  std::sort(chosen.begin(), chosen.end());
  ProbeDataset dataset{ProbeTask::kLen, classes, {}};
  for (size_t i : chosen) dataset.items.push_back({corpus.documents[i].content, label[i]});
  return dataset;
}

namespace {

bool is_word_byte(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}

std::string misspell(const std::string& word, const std::vector<std::string>& keywords, Rng& rng) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::string out = word;
    const size_t pos = static_cast<size_t>(rng.below(word.size()));
    switch (rng.below(3)) {
      case 0:  // transpose with the next character
        if (pos + 1 < out.size()) std::swap(out[pos], out[pos + 1]);
        break;
      case 1:  // drop a character
        if (out.size() > 1) out.erase(pos, 1);
        break;
      default:  // double a character
        out.insert(pos, 1, out[pos]);
        break;
    }
    if (out != word && std::find(keywords.begin(), keywords.end(), out) == keywords.end()) return out;
  }
  return word + word.back();
}

}  // namespace

std::vector<std::pair<size_t, std::string>> find_type_keywords(const std::string& text,
                                                               const std::vector<std::string>& type_keywords) {
  std::vector<std::pair<size_t, std::string>> hits;
  size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(text[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && is_word_byte(text[j])) ++j;
    const std::string word = text.substr(i, j - i);
    if (std::find(type_keywords.begin(), type_keywords.end(), word) != type_keywords.end()) hits.emplace_back(i, word);
    i = j;
  }
  return hits;
}

ProbeDataset gen_typ_labels(const Corpus& corpus, const std::vector<std::string>& type_keywords,
                            double corruption_rate, uint64_t seed, size_t max_items) {
  if (corpus.empty()) throw Error("gen_typ_labels: corpus is empty");
  if (type_keywords.empty()) throw Error("gen_typ_labels: no type keywords given");
  if (!(corruption_rate > 0.0 && corruption_rate < 1.0)) throw Error("gen_typ_labels: corruption rate must be in (0, 1)");
  std::vector<size_t> eligible;
  size_t skipped = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (find_type_keywords(corpus.documents[i].content, type_keywords).empty()) {
      ++skipped;
    } else {
      eligible.push_back(i);
    }
  }
  if (skipped > 0) log_warn("gen_typ_labels: skipped " + std::to_string(skipped) + " documents without a type keyword");
  Rng rng(mix_seed(seed, 0x747970));
  rng.shuffle(std::span<size_t>(eligible));
  size_t n = std::min(eligible.size(), max_items);
  if (corruption_rate == 0.5 && n % 2 == 1) --n;
  if (n < 2) throw Error("gen_typ_labels: fewer than 2 documents contain a type keyword");
  const auto n_corrupt = static_cast<size_t>(std::llround(corruption_rate * static_cast<double>(n)));

  ProbeDataset dataset{ProbeTask::kTyp, 2, {}};
  std::vector<std::pair<size_t, ProbeItem>> items;
  for (size_t k = 0; k < n; ++k) {
    const size_t doc = eligible[k];
    std::string text = corpus.documents[doc].content;
    if (k < n_corrupt) {
      Rng local(mix_seed(seed, doc, 0x636f7272));
      const auto hits = find_type_keywords(text, type_keywords);
      const auto& [offset, word] = hits[local.below(hits.size())];
      text.replace(offset, word.size(), misspell(word, type_keywords, local));
      items.push_back({doc, {std::move(text), 1}});
    } else {
      items.push_back({doc, {std::move(text), 0}});
    }
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [doc, item] : items) dataset.items.push_back(std::move(item));
  return dataset;
}

}  // namespace codescale
