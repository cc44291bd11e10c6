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

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "codescale/common.hpp"
#include "test_util.hpp"

namespace codescale {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean of U(0,1) has std 1/sqrt(12 n); 5 sigma.
  EXPECT_NEAR(sum / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}

TEST(RngTest, BelowCoversRangeEvenly) {
  Rng rng(7);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
  for (int c : counts) EXPECT_NEAR(c, n / 6.0, 5.0 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
  EXPECT_THROW(rng.below(0), Error);
}

TEST(RngTest, NormalMoments) {
  Rng rng(3);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(RngTest, TruncatedNormalHasRequestedStdAndBounds) {
  Rng rng(5);
  const double std = 0.02;
  const int n = 200000;
  double s2 = 0.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.truncated_normal(std);
    s2 += z * z;
    mx = std::max(mx, std::abs(z));
  }
  EXPECT_NEAR(std::sqrt(s2 / n), std, std * 0.01);
  // Truncation at two standard deviations of the underlying normal, which is
  // wider than `std` after rescaling.
  EXPECT_LT(mx, 2.0 * std / 0.8796 + 1e-12);
}

TEST(RngTest, ShuffleIsPermutation) {
  Rng rng(9);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

TEST(SeedTest, MixSeedSeparatesInputs) {
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_NE(mix_seed(1, 2, 3), mix_seed(1, 3, 2));
  EXPECT_EQ(mix_seed(10, 20, 30), mix_seed(10, 20, 30));
}

TEST(HashTest, Fnv1aKnownValues) {
  EXPECT_EQ(hash_string(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hash_string("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(HashTest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(FileTest, AtomicWriteRoundTrip) {
  testing::TempDir dir;
  const auto path = dir / "sub" / "file.bin";
  std::filesystem::create_directories(path.parent_path());
  const std::string data("a\0b\xff", 4);
  write_file_atomic(path, data);
  EXPECT_EQ(read_file(path), data);
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  EXPECT_EQ(sha256_file(path), sha256_hex("second"));
  EXPECT_THROW(read_file(dir / "missing"), Error);
}

TEST(ParallelTest, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelTest, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, [](size_t i) {
                 if (i == 7) throw Error("boom");
               }),
               Error);
}

TEST(ParallelTest, ThreadLimitIsHonoured) {
  const unsigned old = thread_limit();
  set_thread_limit(1);
  EXPECT_EQ(thread_limit(), 1u);
  set_thread_limit(old);
}

}  // namespace
}  // namespace codescale
