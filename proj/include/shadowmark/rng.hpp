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

#ifndef SHADOWMARK_RNG_HPP_
#define SHADOWMARK_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "shadowmark/common.hpp"

namespace shadowmark {

// Deterministic RNG. std::mt19937 is fully specified by the standard; the
// uniform and normal transforms are hand-rolled so that streams are identical
// across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed)
      : seed_(seed), engine_(static_cast<uint32_t>(seed ^ (seed >> 32))) {}

  uint64_t seed() const { return seed_; }

  // Independent substream keyed by a tag or salt.
  Rng derive(const std::string& tag) const { return Rng(seed_ ^ hash_str(tag)); }
  Rng derive(uint64_t salt) const {
    return Rng(seed_ ^ (salt * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
  }

  uint32_t next_u32() { return engine_(); }

  // Uniform in (0,1), never exactly 0 or 1.
  double uniform() { return (static_cast<double>(engine_()) + 0.5) / 4294967296.0; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  // Standard normal via Box-Muller, one cached value.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t seed_;
  std::mt19937 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shadowmark

#endif  // SHADOWMARK_RNG_HPP_
