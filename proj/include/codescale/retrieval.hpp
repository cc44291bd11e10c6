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

#include <json.hpp>

#include "codescale/corpus.hpp"
#include "codescale/model.hpp"
#include "codescale/tokenizer.hpp"
#include "codescale/training.hpp"

namespace codescale {

/// Unit-norm sequence embedding of width `hidden`.
using Embedding = RowVector;

/// Mean of the rows of `hidden` at non-pad positions. Throws when every
/// position is padding.
RowVector mean_pool(const Matrix& hidden, const PadMask& pad);

/// L2-normalized mean of the final hidden states over non-pad positions.
Embedding embed(const EncoderConfig& config, const ParameterSet& params, std::span<const int32_t> ids,
                const PadMask& pad);
Embedding embed(const EncoderConfig& config, const ParameterSet& params, const Sequence& sequence);

/// Embeds every sequence (in parallel); row i is the embedding of item i.
Matrix embed_all(const EncoderConfig& config, const ParameterSet& params, std::span<const Sequence> sequences);

/// Tokenizes `text` as [CLS] tokens [SEP], truncated to `window` and padded.
Sequence encode_text(const TokenizerModel& tokenizer, std::string_view text, size_t window);

/// Entry (i, j) is dot(queries row i, docs row j).
Matrix score_matrix(const Matrix& queries, const Matrix& docs);

/// In-batch softmax cross-entropy: row i of `scores` holds query i against
/// every document of the batch and its positive is document i. Scores are
/// divided by `temperature`. Returns the mean over rows; when `d_scores` is
/// given it receives the gradient with respect to the unscaled scores.
double contrastive_loss(const Matrix& scores, double temperature, Matrix* d_scores = nullptr);

/// Fine-tuning pair with both sides already tokenized.
struct EncodedPair {
  Sequence query;
  Sequence document;
};

struct FinetuneConfig {
  TrainConfig train;           // batch_size, steps, learning-rate schedule, seed
  double temperature = 0.05;
};

struct FinetuneResult {
  ParameterSet params;
  std::vector<double> losses;  // one per optimizer step
};

/// Bi-encoder fine-tuning with in-batch negatives. Queries and documents share
/// the encoder. Batches follow a seeded epoch-wise shuffle of `pairs`. Throws
/// when the batch size or the pair count is below 2.
FinetuneResult finetune_contrastive(const EncoderConfig& config, const ParameterSet& params,
                                    std::span<const EncodedPair> pairs, const FinetuneConfig& finetune);

/// Mean reciprocal rank of `gold[i]` in row i, ranked by descending score with
/// ties going to the lower candidate index.
double mrr(const Matrix& scores, std::span<const size_t> gold);

/// MAP@R over a square item-vs-item score matrix. For query i, R is the number
/// of other items sharing its label; precision is averaged at each relevant
/// hit within the top R (the query itself excluded) and divided by R. Queries
/// whose class has no other member are skipped with a warning.
double map_at_r(const Matrix& scores, std::span<const int> labels);

/// Plain mean average precision over the full ranking (self excluded).
double mean_average_precision(const Matrix& scores, std::span<const int> labels);

/// Search pair: natural-language query and the id of its positive document.
struct RetrievalPair {
  std::string query;
  uint64_t positive_id = 0;
};

/// Clone-detection pool item.
struct PoolItem {
  std::string content;
  int class_id = 0;
};

/// Synthetic code search data: document i is a snippet, pair i is its summary.
struct SearchSet {
  Corpus candidates;
  std::vector<RetrievalPair> pairs;
};
SearchSet synth_search_set(size_t n, uint64_t seed, const std::string& language = "java");

/// Synthetic clone pool: members of a class share a statement skeleton and
/// differ in identifiers (and, when `mixed_languages`, in dialect).
std::vector<PoolItem> synth_clone_pool(size_t classes, size_t per_class, uint64_t seed,
                                       bool mixed_languages = false);

/// Record files, one JSON object per line: {"query", "positive_id"} and
/// {"content", "class_id"}.
void write_pairs(const std::vector<RetrievalPair>& pairs, const std::filesystem::path& path);
std::vector<RetrievalPair> read_pairs(const std::filesystem::path& path);
void write_pool(const std::vector<PoolItem>& pool, const std::filesystem::path& path);
std::vector<PoolItem> read_pool(const std::filesystem::path& path);

/// Candidate index of every pair's positive id in `candidates`. Throws when an
/// id is missing.
std::vector<size_t> gold_indices(const Corpus& candidates, std::span<const RetrievalPair> pairs);

}  // namespace codescale
