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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "codescale/corpus.hpp"
#include "codescale/tokenizer.hpp"
#include "test_util.hpp"

namespace codescale {
namespace {

void write_lines(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

TEST(IngestTest, AssignsIdsInFileOrder) {
  testing::TempDir dir;
  write_lines(dir / "c.jsonl",
              "{\"language\":\"go\",\"content\":\"a\"}\n{\"language\":\"go\",\"content\":\"b\"}\n"
              "{\"language\":\"ruby\",\"content\":\"c\"}\n");
  const Corpus c = ingest_records(dir / "c.jsonl");
  ASSERT_EQ(c.size(), 3u);
  for (uint64_t i = 0; i < 3; ++i) EXPECT_EQ(c.documents[i].id, i);
  EXPECT_EQ(c.documents[2].language, "ruby");
  EXPECT_EQ(c.language_counts().at("go"), 2u);
}

TEST(IngestTest, BlankContentNamesTheLine) {
  testing::TempDir dir;
  write_lines(dir / "c.jsonl", "{\"language\":\"go\",\"content\":\"a\"}\n{\"language\":\"go\",\"content\":\"\"}\n");
  try {
    ingest_records(dir / "c.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(IngestTest, RejectsMalformedEmptyAndDuplicate) {
  testing::TempDir dir;
  write_lines(dir / "bad.jsonl", "{\"language\":\"go\",\"content\":\"a\"}\nnot json\n");
  EXPECT_THROW(ingest_records(dir / "bad.jsonl"), Error);
  write_lines(dir / "empty.jsonl", "");
  EXPECT_THROW(ingest_records(dir / "empty.jsonl"), Error);
  write_lines(dir / "dup.jsonl",
              "{\"language\":\"go\",\"content\":\"a\",\"id\":4}\n{\"language\":\"go\",\"content\":\"b\",\"id\":4}\n");
  EXPECT_THROW(ingest_records(dir / "dup.jsonl"), Error);
  EXPECT_THROW(ingest_records(dir / "missing.jsonl"), Error);
}

TEST(IngestTest, RoundTripIsByteIdentical) {
  testing::TempDir dir;
  const Corpus c = synth_generate("expr", 10000, 11);
  write_records(c, dir / "a.jsonl");
  const Corpus a = ingest_records(dir / "a.jsonl");
  const Corpus b = ingest_records(dir / "a.jsonl");
  EXPECT_EQ(corpus_checksum(a), corpus_checksum(b));
  EXPECT_EQ(corpus_checksum(a), corpus_checksum(c));
  EXPECT_EQ(a.documents, c.documents);
}

TEST(SampleTest, MultiplierOneIsIdentity) {
  const Corpus base = synth_generate("expr", 50, 1);
  const Corpus extra = synth_generate("expr", 200, 2);
  const ScaledCorpus s = sample_scaled(base, extra, 1, 3);
  EXPECT_EQ(s.corpus.documents, base.documents);
}

TEST(SampleTest, CodeSearchNetCountsDouble) {
  const std::map<std::string, size_t> base = {{"python", 412176}, {"java", 454451},      {"go", 317832},
                                              {"php", 523712},    {"javascript", 123889}, {"ruby", 48791}};
  std::map<std::string, size_t> pool;
  for (const auto& [k, v] : base) pool[k] = 10 * v;
  const auto q = scaled_quotas(base, pool, 2);
  const std::map<std::string, size_t> expected = {{"python", 824352}, {"java", 908902},      {"go", 635664},
                                                  {"php", 1047424},   {"javascript", 247778}, {"ruby", 97582}};
  for (const auto& [lang, total] : expected) EXPECT_EQ(q.at(lang).base + q.at(lang).taken, total) << lang;
}

TEST(SampleTest, RubyShortfallTakesWholePool) {
  const std::map<std::string, size_t> base = {{"python", 412176}, {"ruby", 48791}};
  const std::map<std::string, size_t> pool = {{"python", 10000000}, {"ruby", 138069 - 48791}};
  const auto q = scaled_quotas(base, pool, 8);
  EXPECT_EQ(q.at("ruby").base + q.at("ruby").taken, 138069u);
  EXPECT_TRUE(q.at("ruby").shortfall());
  EXPECT_EQ(q.at("python").base + q.at("python").taken, 8u * 412176u);
  EXPECT_FALSE(q.at("python").shortfall());
}

TEST(SampleTest, DrawsWithoutReplacementAndKeepsProportions) {
  const Corpus base = synth_generate("expr", 120, 1);
  const Corpus extra = synth_generate("expr", 2000, 2);
  const ScaledCorpus s = sample_scaled(base, extra, 4, 9);
  for (const auto& [lang, count] : base.language_counts()) {
    EXPECT_EQ(s.corpus.language_counts().at(lang), 4 * count) << lang;
  }
  std::set<std::string> contents;
  for (size_t i = base.size(); i < s.corpus.size(); ++i) contents.insert(s.corpus.documents[i].content);
  EXPECT_EQ(contents.size(), s.corpus.size() - base.size());
  std::set<uint64_t> ids;
  for (const auto& d : s.corpus.documents) ids.insert(d.id);
  EXPECT_EQ(ids.size(), s.corpus.size());
  EXPECT_EQ(corpus_checksum(sample_scaled(base, extra, 4, 9).corpus), corpus_checksum(s.corpus));
  EXPECT_NE(corpus_checksum(sample_scaled(base, extra, 4, 10).corpus), corpus_checksum(s.corpus));
  EXPECT_THROW(sample_scaled(base, extra, 0, 9), Error);
}

TEST(SampleTest, ShortfallKeepsWholePool) {
  Corpus base, extra;
  for (uint64_t i = 0; i < 10; ++i) base.documents.push_back({"ruby", "b" + std::to_string(i), i});
  for (uint64_t i = 0; i < 7; ++i) extra.documents.push_back({"ruby", "e" + std::to_string(i), i});
  const ScaledCorpus s = sample_scaled(base, extra, 3, 1);
  EXPECT_EQ(s.corpus.size(), 17u);
  EXPECT_EQ(s.quotas.at("ruby").requested, 20u);
}

TokenizerModel byte_tokenizer() { return TokenizerModel(); }

Corpus docs_of_lengths(const std::vector<size_t>& lengths) {
  Corpus c;
  for (size_t i = 0; i < lengths.size(); ++i) c.documents.push_back({"x", std::string(lengths[i], 'q'), i});
  return c;
}

TEST(ChunkTest, ExactDivisionAndTailRule) {
  const TokenizerModel tok = byte_tokenizer();
  EXPECT_EQ(chunk_fixed(docs_of_lengths({1024}), tok, {512, 64}).size(), 2u);
  const auto s = chunk_fixed(docs_of_lengths({513}), tok, {512, 64});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].length, 512u);
  const auto kept = chunk_fixed(docs_of_lengths({600}), tok, {512, 64});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].length, 88u);
  EXPECT_EQ(kept[1].ids.size(), 512u);
  EXPECT_EQ(kept[1].ids.back(), tok.special().pad);
  EXPECT_THROW(chunk_fixed(docs_of_lengths({10}), tok, {1, 1}), Error);
}

TEST(ChunkTest, CountMatchesPerDocumentArithmetic) {
  const Corpus corpus = synth_generate("expr", 100, 4);
  const TokenizerModel tok = train_bpe(corpus, 400);
  const ChunkOptions opt{32, 8};
  size_t expected = 0;
  for (const auto& d : corpus.documents) {
    const size_t n = tok.encode(d.content).size();
    expected += n / 32 + ((n % 32) >= 8 ? 1 : 0);
  }
  const auto seqs = chunk_fixed(corpus, tok, opt);
  EXPECT_EQ(seqs.size(), expected);
  for (const auto& s : seqs) {
    EXPECT_EQ(s.ids.size(), 32u);
    EXPECT_LE(s.length, 32u);
  }
}

TEST(SplitTest, SizesAndCoverage) {
  const Corpus c = synth_generate("expr", 1000, 5);
  const CorpusSplit s = split(c, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.valid.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
  std::multiset<uint64_t> ids;
  for (const Corpus* part : {&s.train, &s.valid, &s.test}) {
    for (const auto& d : part->documents) ids.insert(d.id);
  }
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_EQ(std::set<uint64_t>(ids.begin(), ids.end()).size(), 1000u);
  const CorpusSplit again = split(c, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(corpus_checksum(again.test), corpus_checksum(s.test));
}

TEST(SplitTest, DegenerateAndInvalidRatios) {
  const Corpus c = synth_generate("expr", 20, 5);
  const CorpusSplit s = split(c, {1.0, 0.0, 0.0}, 1);
  EXPECT_EQ(s.train.size(), 20u);
  EXPECT_TRUE(s.valid.empty());
  EXPECT_THROW(split(c, {0.5, 0.1, 0.1}, 1), Error);
  EXPECT_THROW(split(c, {1.2, -0.1, -0.1}, 1), Error);
}

TEST(SynthTest, DeterministicAndSized) {
  EXPECT_TRUE(synth_generate("expr", 0, 1).empty());
  const Corpus a = synth_generate("expr", 1000, 8);
  EXPECT_EQ(a.size(), 1000u);
  EXPECT_EQ(corpus_checksum(a), corpus_checksum(synth_generate("expr", 1000, 8)));
  EXPECT_NE(corpus_checksum(a), corpus_checksum(synth_generate("expr", 1000, 9)));
  EXPECT_THROW(synth_generate("nope", 1, 1), Error);
  for (const auto& d : synth_generate("expr-java", 20, 1).documents) EXPECT_EQ(d.language, "java");
}

TEST(SynthTest, DocumentsTokenizeToAtLeastEightTokensAndHoldTypeKeywords) {
  const Corpus c = synth_generate("expr", 500, 12);
  const TokenizerModel tok = train_bpe(c, 1024);
  for (const auto& d : c.documents) {
    EXPECT_GE(tok.encode(d.content).size(), 8u);
    bool has_type = false;
    for (const auto& kw : synth_type_keywords()) has_type |= d.content.find(kw) != std::string::npos;
    EXPECT_TRUE(has_type) << d.content;
  }
}

TEST(SynthTest, SharedStructureSeedGivesClones) {
  const SynthSnippet a = synth_snippet("java", 77, 1);
  const SynthSnippet b = synth_snippet("java", 77, 2);
  const SynthSnippet c = synth_snippet("java", 78, 1);
  EXPECT_NE(a.code, b.code);
  EXPECT_NE(a.code, c.code);
  EXPECT_EQ(synth_snippet("java", 77, 1).code, a.code);
  EXPECT_FALSE(a.summary.empty());
  for (const auto& lang : synth_languages()) EXPECT_FALSE(synth_snippet(lang, 1, 1).code.empty());
}

}  // namespace
}  // namespace codescale
