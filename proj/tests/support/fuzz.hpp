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

#include <string>
#include <utility>
#include <vector>

#include "codescale/common.hpp"

namespace codescale::oracle {

// Reference segmentation: apply the merges in order to the byte sequence.
inline std::vector<std::string> reference_segments(const std::vector<std::pair<std::string, std::string>>& merges,
                                            const std::string& text) {
  std::vector<std::string> seq;
  for (char ch : text) seq.emplace_back(1, ch);
  for (const auto& [a, b] : merges) {
    std::vector<std::string> next;
    for (size_t i = 0; i < seq.size(); ++i) {
      if (i + 1 < seq.size() && seq[i] == a && seq[i + 1] == b) {
        next.push_back(a + b);
        ++i;
      } else {
        next.push_back(seq[i]);
      }
    }
    seq = std::move(next);
  }
  return seq;
}

inline std::string random_utf8(Rng& rng, size_t max_chars) {
  std::string s;
  const size_t n = rng.below(max_chars + 1);
  for (size_t i = 0; i < n; ++i) {
    uint32_t cp;
    switch (rng.below(4)) {
      case 0: cp = 0x20 + static_cast<uint32_t>(rng.below(0x5f)); break;
      case 1: cp = 0x80 + static_cast<uint32_t>(rng.below(0x780)); break;
      case 2:
        do cp = 0x800 + static_cast<uint32_t>(rng.below(0xf800)); while (cp >= 0xd800 && cp < 0xe000);
        break;
      default: cp = 0x10000 + static_cast<uint32_t>(rng.below(0x100000)); break;
    }
    if (cp < 0x80) {
      s += static_cast<char>(cp);
    } else if (cp < 0x800) {
      s += static_cast<char>(0xc0 | (cp >> 6));
      s += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
      s += static_cast<char>(0xe0 | (cp >> 12));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      s += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      s += static_cast<char>(0xf0 | (cp >> 18));
      s += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      s += static_cast<char>(0x80 | (cp & 0x3f));
    }
  }
  return s;
}

}  // namespace codescale::oracle
