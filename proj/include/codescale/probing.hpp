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
#include <span>
#include <string>
#include <vector>

#include "codescale/corpus.hpp"
#include "codescale/model.hpp"
#include "codescale/tokenizer.hpp"

namespace codescale {

/// Probing tasks: token length bin, AST node type, cyclomatic complexity and
/// type-keyword validity.
enum class ProbeTask { kLen, kAst, kCpx, kTyp };

std::string to_string(ProbeTask task);
ProbeTask parse_probe_task(const std::string& text);
/// 5, 20, 10 and 2 classes respectively.
size_t class_count(ProbeTask task);

struct ProbeItem {
  std::string content;
  int label = 0;
  bool operator==(const ProbeItem&) const = default;
};

struct ProbeDataset {
  ProbeTask task = ProbeTask::kLen;
  size_t class_count = 0;
  std::vector<ProbeItem> items;

  std::vector<int> labels() const;
  std::vector<size_t> histogram() const;
  /// Throws when a label is outside [0, class_count).
  void validate() const;
  /// True when every class count is within `tolerance` (a fraction of the
  /// largest class) of the largest class.
  bool balanced(double tolerance) const;
};

/// Label record file: one {"content", "label"} JSON object per line.
ProbeDataset read_probe_dataset(const std::filesystem::path& path, ProbeTask task);
void write_probe_dataset(const ProbeDataset& dataset, const std::filesystem::path& path);

/// Tokenizes every item as [CLS] tokens [SEP] within `window`.
std::vector<Sequence> encode_dataset(const TokenizerModel& tokenizer, const ProbeDataset& dataset, size_t window);

/// One mean-pooled (non-pad positions) hidden-state row per sequence, from
/// hidden layer `layer` (0 is the embedding output, `layers` the last).
Matrix extract_features(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences,
                        int layer);
/// Features of every layer from a single forward pass per sequence.
std::vector<Matrix> extract_all_layers(const EncoderConfig& config, const ParameterSet& params,
                                       std::span<const Sequence> sequences);

/// Multinomial logistic regression applied to raw features.
struct LinearProbe {
  Matrix weight;  // [class_count x hidden]
  RowVector bias;  // [class_count]
  int layer = -1;
  // Training diagnostics.
  size_t iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool converged = false;
};

/// Full-batch gradient descent on the mean cross-entropy plus
/// 0.5 * l2 * |W|^2. Features are standardized per column internally and the
/// transform is folded back into the returned weights. Training stops when
/// the largest absolute gradient entry drops below `tolerance` or after
/// `max_iterations` steps.
struct ProbeTrainConfig {
  double learning_rate = 0.5;
  size_t max_iterations = 500;
  double tolerance = 1e-5;
  double l2 = 1e-4;
};

/// Weights start from N(0, 0.01^2) drawn from `seed`. Throws when fewer than
/// two classes are present or a label is out of range.
LinearProbe train_probe(const Matrix& features, std::span<const int> labels, size_t class_count, uint64_t seed,
                        const ProbeTrainConfig& options = {});

/// Predicted class per row; ties go to the lowest class index.
std::vector<int> probe_predict(const LinearProbe& probe, const Matrix& features);
double probe_accuracy(const LinearProbe& probe, const Matrix& features, std::span<const int> labels);

/// Seeded 80/20 split of n item indices (train first, then test), each part
/// in ascending order.
struct IndexSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
};
IndexSplit probe_split(size_t n, uint64_t seed);

/// Rows of `m` at `rows`, and the matching labels.
Matrix select_rows(const Matrix& m, std::span<const size_t> rows);
std::vector<int> select_labels(std::span<const int> labels, std::span<const size_t> rows);

struct LayerResult {
  int layer = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct LayerSweep {
  std::vector<LayerResult> results;  // layers + 1 entries
  std::string to_csv() const;       // layer,train_acc,test_acc
  std::string to_svg(const std::string& title) const;
};

/// Trains one probe per hidden layer on the seeded 80% split and reports
/// accuracy on both parts. Every layer uses the same split and probe seed.
LayerSweep layer_sweep(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences,
                       std::span<const int> labels, size_t class_count, uint64_t seed,
                       const ProbeTrainConfig& options = {});

inline const std::vector<size_t> kDefaultLenEdges = {50, 100, 150, 200};
inline constexpr size_t kDefaultProbeSize = 10000;

/// LEN labels: class = index of the half-open interval [edge_{i-1}, edge_i)
/// holding the token count (no special tokens), with an open top bin. Classes
/// are rebalanced by seeded subsampling to the smallest class, capped at
/// max_items in total. Throws when a bin is empty.
ProbeDataset gen_len_labels(const Corpus& corpus, const TokenizerModel& tokenizer,
                            const std::vector<size_t>& edges = kDefaultLenEdges, uint64_t seed = 0,
                            size_t max_items = kDefaultProbeSize);
/// Class of a token count under `edges`.
int len_class(size_t tokens, const std::vector<size_t>& edges);

/// TYP labels: documents holding at least one whole-word type keyword are
/// shuffled; the first `corruption_rate` fraction get exactly one keyword
/// occurrence misspelled (label 1) and the rest stay byte-identical (label
/// 0). Documents without a keyword are skipped with a warning. With rate 0.5
/// an odd eligible count drops one document so the classes are equal.
ProbeDataset gen_typ_labels(const Corpus& corpus, const std::vector<std::string>& type_keywords,
                            double corruption_rate = 0.5, uint64_t seed = 0, size_t max_items = kDefaultProbeSize);

/// Whole-word occurrences (byte offsets) of any keyword in `text`.
std::vector<std::pair<size_t, std::string>> find_type_keywords(const std::string& text,
                                                               const std::vector<std::string>& type_keywords);

}  // namespace codescale
