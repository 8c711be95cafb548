// Copyright 2026 The ShadowMark Authors
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

#ifndef SHADOWMARK_COMMON_HPP_
#define SHADOWMARK_COMMON_HPP_

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace shadowmark {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// 64-bit FNV-1a over a byte range.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(uint64_t v);
uint64_t from_hex(const std::string& s);

// Stable 64-bit hash of a string, used to derive RNG substreams.
inline uint64_t hash_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace shadowmark

#endif  // SHADOWMARK_COMMON_HPP_
