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

#ifndef SHADOWMARK_KEYSMITH_HPP_
#define SHADOWMARK_KEYSMITH_HPP_

#include <filesystem>
#include <optional>
#include <vector>

#include "shadowmark/rng.hpp"
#include "shadowmark/tensor.hpp"

namespace shadowmark {

// Secret keys are vectors of iid standard-normal floats. The generation
// algorithm is public; only the drawn vector is secret.

// Wrong keys must stay at least this far (L2) from the correct key.
inline constexpr double kMinWrongKeyDistance = 1.0;

struct Key {
  std::vector<float> values;
  std::optional<uint64_t> seed;  // provenance when drawn via keygen

  int dim() const { return static_cast<int>(values.size()); }
};

// Deterministic draw of `key_dim` (>= 16) standard-normal entries.
Key keygen(int key_dim, uint64_t seed);

// Fresh keygen-distributed draw, redrawn until it is at least
// kMinWrongKeyDistance away from `correct` (hard cap 100 redraws).
Key sample_wrong_key(const Key& correct, Rng& rng);

double key_distance(const Key& a, const Key& b);
uint64_t key_digest(const Key& k);
Tensor key_tensor(const Key& k);

// `<path>` holds raw little-endian float32; `<path>.json` the sidecar with
// key_dim, digest and optional seed. Digest mismatch on load is an error.
void save_key(const Key& k, const std::filesystem::path& path);
Key load_key(const std::filesystem::path& path);

}  // namespace shadowmark

#endif  // SHADOWMARK_KEYSMITH_HPP_
