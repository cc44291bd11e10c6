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
#include <map>
#include <string>
#include <vector>

#include "codescale/common.hpp"

namespace codescale {

class TokenizerModel;

struct Document {
  std::string language;
  std::string content;
  uint64_t id = 0;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  std::string provenance;
  uint64_t seed = 0;

  size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  std::map<std::string, size_t> language_counts() const;
};

/// Reads a line-delimited JSON record file. Each line holds an object with
/// string fields `language` and `content` and an optional integer `id`;
/// records without an id get their zero-based line index.
Corpus ingest_records(const std::filesystem::path& path);

/// Serializes a corpus in the record format read by ingest_records.
std::string serialize_records(const Corpus& corpus);
void write_records(const Corpus& corpus, const std::filesystem::path& path);

/// SHA-256 over the canonical record serialization.
std::string corpus_checksum(const Corpus& corpus);

struct LanguageQuota {
  size_t base = 0;
  size_t requested = 0;  // extra documents wanted: (multiplier - 1) * base
  size_t available = 0;  // extra pool size for this language
  size_t taken = 0;      // min(requested, available)

  bool shortfall() const { return taken < requested; }
};

/// Per-language extra-document quotas for scaling a base corpus by
/// `multiplier`. Languages absent from the base get no quota.
std::map<std::string, LanguageQuota> scaled_quotas(const std::map<std::string, size_t>& base_counts,
                                                   const std::map<std::string, size_t>& pool_counts,
                                                   uint64_t multiplier);

struct ScaledCorpus {
  Corpus corpus;
  std::map<std::string, LanguageQuota> quotas;
};

/// Base corpus plus (multiplier - 1) x base-count extra documents per
/// language, drawn without replacement from `extra`. A language whose pool is
/// too small contributes its whole pool and a warning is logged. Documents are
/// renumbered densely in output order (base first, then sampled extras in
/// pool order).
ScaledCorpus sample_scaled(const Corpus& base, const Corpus& extra, uint64_t multiplier, uint64_t seed);

/// Fixed-length training window. `ids` always holds exactly `window` entries;
/// positions at or beyond `length` are padding.
struct Sequence {
  std::vector<int32_t> ids;
  size_t length = 0;
  uint64_t doc_id = 0;

  bool operator==(const Sequence&) const = default;
};

struct ChunkOptions {
  size_t window = 512;
  size_t min_keep = 64;
};

/// Cuts each document's token stream into consecutive windows. A trailing
/// partial window shorter than `min_keep` is dropped, otherwise padded.
std::vector<Sequence> chunk_fixed(const Corpus& corpus, const TokenizerModel& tokenizer,
                                  const ChunkOptions& options);

/// Number of windows chunk_fixed emits for a stream of `tokens` tokens.
size_t chunk_count(size_t tokens, const ChunkOptions& options);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
};

/// Seeded disjoint partition. Each part keeps the input's relative order.
CorpusSplit split(const Corpus& corpus, const SplitRatios& ratios, uint64_t seed);

/// Preset names accepted by synth_generate.
std::vector<std::string> synth_presets();

/// Primitive type keywords the synthetic generators embed in every document.
const std::vector<std::string>& synth_type_keywords();

/// One synthetic function. `summary` is a short natural-language description
/// built from the function's identifiers (used as a code-search query).
struct SynthSnippet {
  std::string language;
  std::string code;
  std::string summary;
};

const std::vector<std::string>& synth_languages();

/// Renders one function. The statement skeleton (control flow, operators,
/// literals, types) is a function of `structure_seed` only; identifiers are a
/// function of `naming_seed` only. Two calls sharing a structure seed are
/// therefore semantic clones.
SynthSnippet synth_snippet(const std::string& language, uint64_t structure_seed, uint64_t naming_seed);

/// Generates `n` function-like documents. Presets:
///   "expr"      multi-language snippets (python/java/go/php/javascript/ruby
///               dialects, mixed in CodeSearchNet training proportions)
///   "expr-java" the java dialect only
Corpus synth_generate(const std::string& preset, size_t n, uint64_t seed);

}  // namespace codescale
