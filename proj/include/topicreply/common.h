// Copyright 2026 The topicreply Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPICREPLY_COMMON_H_
#define TOPICREPLY_COMMON_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace topicreply {

// Raised for malformed input data and violated preconditions on data files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage was asked to run before the artifact it consumes exists
// (or the artifact was produced under a different configuration).
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(const std::filesystem::path& path, const std::string& why)
      : Error(why + ": " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// 64-bit FNV-1a. Used for fingerprints and config hashes, never for security.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  Fnv1a& update_u64(uint64_t v);
  uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

uint64_t fnv1a(std::string_view bytes);
std::string to_hex(uint64_t v);
std::string hash_file_hex(const std::filesystem::path& path);

// SplitMix64 finalizer; derives independent stream seeds from a base seed.
uint64_t mix_seed(uint64_t base, uint64_t salt);

// mt19937_64 has a fully specified output sequence, so anything seeded from
// it reproduces run to run.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n).
uint64_t uniform_index(Rng& rng, uint64_t n);

// Fisher-Yates with uniform_index, so permutations do not depend on the
// standard library's distribution implementations.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::string trim(std::string_view s);

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each index
// is processed exactly once; callers write results into pre-sized slots so
// output order never depends on scheduling.
void parallel_for(size_t n, const std::function<void(size_t)>& fn,
                  unsigned max_threads = 0);

}  // namespace topicreply

#endif  // TOPICREPLY_COMMON_H_
