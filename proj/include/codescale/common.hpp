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
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace codescale {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Portable random source. The engine is std::mt19937_64 (fully specified by
/// the standard); the distributions are implemented here because the
/// std:: distributions are implementation-defined and would break
/// cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n);
  double normal();
  /// Normal(0, std) truncated to +-2 std and rescaled so the truncated
  /// distribution has standard deviation exactly `std`.
  double truncated_normal(double std);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Stateless seed derivation (splitmix64 finalizer over the inputs).
uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c);

/// FNV-1a 64-bit; stable across platforms, used for seed derivation only.
uint64_t hash_string(std::string_view bytes);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Number of worker threads used by parallel loops; 0 means hardware default.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Runs body(i) for i in [0, n). Iterations must write to disjoint state;
/// callers reduce results in index order so output does not depend on the
/// thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& body);

void log_info(const std::string& message);
void log_warn(const std::string& message);

}  // namespace codescale
