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

#include <algorithm>
#include <cmath>
#include <set>

#include "codescale/probing.hpp"
#include "test_util.hpp"

namespace codescale {
namespace {

using testing::TempDir;

struct Synthetic {
  Matrix features;
  std::vector<int> labels;
};

// Class c sits at 6 * e_c (plus an offset) with unit Gaussian noise.
Synthetic separable(size_t n, int classes, int width, uint64_t seed) {
  Rng rng(seed);
  Synthetic s;
  s.features.resize(static_cast<Eigen::Index>(n), width);
  for (size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<size_t>(classes));
    s.labels.push_back(c);
    for (int k = 0; k < width; ++k) {
      s.features(static_cast<Eigen::Index>(i), k) = 0.3 * rng.normal() + (k == c ? 6.0 : 0.0) + 2.0;
    }
  }
  return s;
}

TEST(ProbeTaskTest, NamesAndClassCounts) {
  EXPECT_EQ(class_count(ProbeTask::kLen), 5u);
  EXPECT_EQ(class_count(ProbeTask::kAst), 20u);
  EXPECT_EQ(class_count(ProbeTask::kCpx), 10u);
  EXPECT_EQ(class_count(ProbeTask::kTyp), 2u);
  EXPECT_EQ(parse_probe_task("typ"), ProbeTask::kTyp);
  EXPECT_EQ(parse_probe_task(to_string(ProbeTask::kCpx)), ProbeTask::kCpx);
  EXPECT_THROW(parse_probe_task("xyz"), Error);
}

TEST(ProbeTrainTest, SeparableFeaturesNearPerfect) {
  const Synthetic s = separable(600, 5, 8, 1);
  const LinearProbe p = train_probe(s.features, s.labels, 5, 3);
  EXPECT_GE(probe_accuracy(p, s.features, s.labels), 0.99);
  EXPECT_LT(p.final_loss, p.initial_loss);
  EXPECT_EQ(p.weight.rows(), 5);
  EXPECT_EQ(p.weight.cols(), 8);
  const Synthetic held = separable(300, 5, 8, 2);
  EXPECT_GE(probe_accuracy(p, held.features, held.labels), 0.99);
}

TEST(ProbeTrainTest, ShuffledLabelsStayNearChance) {
  Rng rng(4);
  const size_t n = 3000;
  for (int k : {2, 5}) {
    Synthetic s = separable(n, k, 6, 10 + static_cast<uint64_t>(k));
    rng.shuffle(std::span<int>(s.labels));
    const IndexSplit split = probe_split(n, 7);
    const LinearProbe p = train_probe(select_rows(s.features, split.train), select_labels(s.labels, split.train),
                                      static_cast<size_t>(k), 1);
    const double acc = probe_accuracy(p, select_rows(s.features, split.test), select_labels(s.labels, split.test));
    const double chance = 1.0 / k;
    const double sigma = std::sqrt(chance * (1 - chance) / static_cast<double>(split.test.size()));
    EXPECT_LT(std::abs(acc - chance), 3 * sigma) << "k=" << k << " acc=" << acc;
  }
}

TEST(ProbeTrainTest, DeterministicAndValidated) {
  const Synthetic s = separable(100, 3, 4, 5);
  const LinearProbe a = train_probe(s.features, s.labels, 3, 9);
  const LinearProbe b = train_probe(s.features, s.labels, 3, 9);
  EXPECT_EQ(a.weight, b.weight);
  EXPECT_EQ(a.bias, b.bias);
  std::vector<int> one(100, 0);
  EXPECT_THROW(train_probe(s.features, one, 1, 9), Error);
  std::vector<int> oob = s.labels;
  oob[3] = 7;
  EXPECT_THROW(train_probe(s.features, oob, 3, 9), Error);
  const std::vector<int> short_labels(10, 0);
  EXPECT_THROW(train_probe(s.features, short_labels, 3, 9), Error);
}

TEST(ProbeTrainTest, PredictTiesToLowestClass) {
  LinearProbe p;
  p.weight = Matrix::Zero(3, 2);
  p.bias = RowVector::Zero(3);
  const auto pred = probe_predict(p, Matrix::Ones(2, 2));
  EXPECT_EQ(pred, (std::vector<int>{0, 0}));
}

TEST(SplitTest, DisjointCoveringAndSeeded) {
  const IndexSplit a = probe_split(101, 3);
  EXPECT_EQ(a.train.size() + a.test.size(), 101u);
  EXPECT_EQ(a.test.size(), 20u);
  std::set<size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 101u);
  EXPECT_TRUE(std::is_sorted(a.train.begin(), a.train.end()));
  const IndexSplit b = probe_split(101, 3);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(probe_split(101, 4).test, a.test);
}

TEST(FeatureTest, LayersAndSweep) {
  const EncoderConfig c = make_config(2, 8, 2, 4, 261, 24, NormPlacement::kPost);
  const ParameterSet p = init_params(c, 3);
  const TokenizerModel tok;
  ProbeDataset ds;
  ds.task = ProbeTask::kTyp;
  ds.class_count = 2;
  for (int i = 0; i < 60; ++i) {
    ds.items.push_back({i % 2 ? "int x = " + std::to_string(i) + ";" : "String s" + std::to_string(i) + " = \"\";", i % 2});
  }
  const auto seqs = encode_dataset(tok, ds, 24);
  ASSERT_EQ(seqs.size(), 60u);
  const auto layers = extract_all_layers(c, p, seqs);
  ASSERT_EQ(layers.size(), 3u);
  EXPECT_EQ(extract_features(c, p, seqs, 1), layers[1]);
  EXPECT_THROW(extract_features(c, p, seqs, 3), Error);
  EXPECT_THROW(extract_features(c, p, seqs, -1), Error);
  const auto labels = ds.labels();
  const LayerSweep a = layer_sweep(c, p, seqs, labels, 2, 5);
  const LayerSweep b = layer_sweep(c, p, seqs, labels, 2, 5);
  ASSERT_EQ(a.results.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.results[i].layer, static_cast<int>(i));
    EXPECT_EQ(a.results[i].test_accuracy, b.results[i].test_accuracy);
    EXPECT_EQ(a.results[i].train_accuracy, b.results[i].train_accuracy);
  }
  EXPECT_EQ(a.to_csv().rfind("layer,train_acc,test_acc\n", 0), 0u);
  EXPECT_NE(a.to_svg("typ").find("<svg"), std::string::npos);
}

TEST(DatasetTest, RoundTripAndValidation) {
  TempDir dir;
  ProbeDataset ds;
  ds.task = ProbeTask::kLen;
  ds.class_count = 5;
  for (int i = 0; i < 10; ++i) ds.items.push_back({"x" + std::to_string(i), i % 5});
  EXPECT_TRUE(ds.balanced(0.0));
  write_probe_dataset(ds, dir / "len.jsonl");
  const ProbeDataset back = read_probe_dataset(dir / "len.jsonl", ProbeTask::kLen);
  EXPECT_EQ(back.items, ds.items);
  EXPECT_EQ(back.histogram(), (std::vector<size_t>{2, 2, 2, 2, 2}));
  ds.items.push_back({"y", 0});
  EXPECT_FALSE(ds.balanced(0.1));
  EXPECT_TRUE(ds.balanced(0.5));
  write_file_atomic(dir / "bad.jsonl", "{\"content\": \"a\", \"label\": 9}\n");
  EXPECT_THROW(read_probe_dataset(dir / "bad.jsonl", ProbeTask::kLen), Error);
}

TEST(LenLabelTest, BinsAndBalance) {
  EXPECT_EQ(len_class(0, kDefaultLenEdges), 0);
  EXPECT_EQ(len_class(49, kDefaultLenEdges), 0);
  EXPECT_EQ(len_class(50, kDefaultLenEdges), 1);
  EXPECT_EQ(len_class(199, kDefaultLenEdges), 3);
  EXPECT_EQ(len_class(200, kDefaultLenEdges), 4);
  const TokenizerModel tok;
  Corpus c;
  for (size_t i = 0; i < 100; ++i) c.documents.push_back({"java", std::string(3 + i * 2, 'a'), i});
  const std::vector<size_t> edges = {40, 80, 120, 160};
  const ProbeDataset ds = gen_len_labels(c, tok, edges, 1);
  EXPECT_EQ(ds.class_count, 5u);
  EXPECT_TRUE(ds.balanced(0.0));
  for (const auto& item : ds.items) {
    EXPECT_EQ(item.label, len_class(tok.encode(item.content).size(), edges));
  }
  const std::vector<size_t> wide = {40, 80, 120, 1000};
  EXPECT_THROW(gen_len_labels(c, tok, wide, 1), Error);
}

TEST(TypLabelTest, CorruptsHalfWithNonKeywords) {
  const std::vector<std::string> keys = {"int", "String", "boolean"};
  Corpus c;
  for (size_t i = 0; i < 40; ++i) {
    c.documents.push_back({"java", "int v" + std::to_string(i) + " = 1; String s = \"print\";", i});
  }
  c.documents.push_back({"java", "x = y;", 99});
  const ProbeDataset ds = gen_typ_labels(c, keys, 0.5, 3);
  EXPECT_EQ(ds.items.size(), 40u);
  EXPECT_TRUE(ds.balanced(0.0));
  for (const auto& item : ds.items) {
    const auto found = find_type_keywords(item.content, keys);
    // Label 1 marks a corrupted item: one keyword occurrence is misspelled.
    EXPECT_EQ(found.size(), item.label == 1 ? 1u : 2u) << item.content;
  }
  EXPECT_EQ(find_type_keywords("print(integer)", keys).size(), 0u);
  EXPECT_EQ(find_type_keywords("int a; boolean b", keys).size(), 2u);
}

}  // namespace
}  // namespace codescale
