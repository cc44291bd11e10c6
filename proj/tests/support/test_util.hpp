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

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>
#include <unistd.h>

#include "codescale/common.hpp"
#include "codescale/corpus.hpp"

namespace codescale::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("codescale_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Random windows over byte-range ids with [CLS] first; `length` varies so some
/// windows carry padding.
inline std::vector<Sequence> random_sequences(size_t count, size_t window, int vocab, uint64_t seed) {
  Rng rng(seed);
  std::vector<Sequence> out;
  for (size_t i = 0; i < count; ++i) {
    Sequence s;
    s.length = window - rng.below(window / 4 + 1);
    s.doc_id = i;
    s.ids.assign(window, 3);
    s.ids[0] = 0;
    for (size_t t = 1; t < s.length; ++t) s.ids[t] = 5 + static_cast<int32_t>(rng.below(static_cast<uint64_t>(vocab - 5)));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace codescale::testing
