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

#include "shadowmark/keysmith.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "shadowmark/checkpoint.hpp"
#include "shadowmark/common.hpp"

namespace shadowmark {

Key keygen(int key_dim, uint64_t seed) {
  if (key_dim < 16)
    throw Error("keygen: key_dim must be >= 16, got " + std::to_string(key_dim));
  Key k;
  k.seed = seed;
  k.values.resize(static_cast<size_t>(key_dim));
  Rng rng = Rng(seed).derive("keygen");
  for (auto& v : k.values) v = static_cast<float>(rng.normal());
  return k;
}

Key sample_wrong_key(const Key& correct, Rng& rng) {
  if (correct.values.empty()) throw Error("sample_wrong_key: empty correct key");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Key cand;
    cand.values.resize(correct.values.size());
    for (auto& v : cand.values) v = static_cast<float>(rng.normal());
    if (key_distance(cand, correct) >= kMinWrongKeyDistance) return cand;
  }
  throw Error("sample_wrong_key: no admissible key after 100 redraws");
}

double key_distance(const Key& a, const Key& b) {
  if (a.dim() != b.dim()) throw Error("key_distance: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    const double d = static_cast<double>(a.values[i]) - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

uint64_t key_digest(const Key& k) {
  return fnv1a64(k.values.data(), k.values.size() * sizeof(float));
}

Tensor key_tensor(const Key& k) {
  Tensor t({k.dim()});
  t.data = k.values;
  return t;
}

void save_key(const Key& k, const std::filesystem::path& path) {
  write_f32_file(path, k.values.data(), k.values.size());
  nlohmann::json sidecar;
  sidecar["key_dim"] = k.dim();
  sidecar["digest_fnv1a64"] = to_hex(key_digest(k));
  if (k.seed) sidecar["seed"] = *k.seed;
  std::ofstream f(path.string() + ".json", std::ios::trunc);
  if (!f) throw Error("cannot write key sidecar: " + path.string() + ".json");
  f << sidecar.dump(2) << "\n";
}

Key load_key(const std::filesystem::path& path) {
  std::ifstream f(path.string() + ".json");
  if (!f) throw Error("cannot read key sidecar: " + path.string() + ".json");
  nlohmann::json sidecar;
  try {
    f >> sidecar;
    Key k;
    k.values = read_f32_file(path);
    if (static_cast<int>(k.values.size()) != sidecar.at("key_dim").get<int>())
      throw Error("key file length disagrees with sidecar key_dim: " + path.string());
    if (to_hex(key_digest(k)) != sidecar.at("digest_fnv1a64").get<std::string>())
      throw Error("key corrupted: digest mismatch: " + path.string());
    if (sidecar.contains("seed")) k.seed = sidecar["seed"].get<uint64_t>();
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed key sidecar " + path.string() + ".json: " + e.what());
  }
}

}  // namespace shadowmark
