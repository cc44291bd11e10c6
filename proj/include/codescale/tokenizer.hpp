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
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codescale/corpus.hpp"

namespace codescale {

/// Ids of the special tokens. They occupy the lowest ids, followed by the
/// 256 single-byte tokens, followed by one token per merge in merge order.
struct SpecialIds {
  int32_t cls = 0;
  int32_t sep = 1;
  int32_t mask = 2;
  int32_t pad = 3;
  int32_t unk = 4;
};

/// Byte-level BPE model. Immutable once built; all members are const and
/// safe to call concurrently.
class TokenizerModel {
 public:
  static constexpr int32_t kSpecialCount = 5;
  static constexpr int32_t kByteOffset = kSpecialCount;
  static constexpr int32_t kBaseVocab = kSpecialCount + 256;

  using Merge = std::pair<int32_t, int32_t>;

  TokenizerModel();
  explicit TokenizerModel(std::vector<Merge> merges);

  size_t vocab_size() const { return token_bytes_.size(); }
  const std::vector<Merge>& merges() const { return merges_; }
  const SpecialIds& special() const { return special_; }
  bool is_special(int32_t id) const { return id >= 0 && id < kSpecialCount; }

  /// Raw bytes of a non-special token (empty for specials).
  const std::string& token_bytes(int32_t id) const;
  /// Display name; specials render as "[CLS]" etc.
  std::string token_name(int32_t id) const;

  std::vector<int32_t> encode(std::string_view text, bool add_specials = false) const;
  /// Concatenates token bytes, dropping special tokens. Throws on ids outside
  /// the vocabulary.
  std::string decode(std::span<const int32_t> ids) const;

  std::string serialize() const;
  static TokenizerModel parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TokenizerModel load(const std::filesystem::path& path);
  std::string checksum() const;

  bool operator==(const TokenizerModel& other) const { return merges_ == other.merges_; }

 private:
  static uint64_t pair_key(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
  }

  std::vector<Merge> merges_;
  std::vector<std::string> token_bytes_;
  std::unordered_map<uint64_t, int32_t> rank_;
  SpecialIds special_;
};

/// Greedy BPE training: repeatedly merges the most frequent adjacent pair
/// (overlapping occurrences counted) until `vocab_size` tokens exist or no
/// pair occurs at least twice. Ties go to the lexicographically smallest
/// (left bytes, right bytes). Each document is one training unit; there is no
/// pre-tokenization.
TokenizerModel train_bpe(const Corpus& corpus, size_t vocab_size);

/// Vocabulary size requested by the "csn-paper" preset.
inline constexpr size_t kCsnVocabSize = 50265;
/// Desk-scale default vocabulary.
inline constexpr size_t kDefaultVocabSize = 4096;

/// Named vocabulary-size presets: "csn-paper" and "desk".
size_t tokenizer_preset_vocab(const std::string& name);

}  // namespace codescale
