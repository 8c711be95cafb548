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

#ifndef SHADOWMARK_VERDICT_HPP_
#define SHADOWMARK_VERDICT_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "shadowmark/keysmith.hpp"
#include "shadowmark/network.hpp"
#include "shadowmark/tensor.hpp"

namespace shadowmark {

// Any forward-only model interface: the original M, a served endpoint, or a
// suspect surrogate.
using BlackboxFn = std::function<Tensor(const Tensor&)>;

struct VerificationPolicy {
  double ncc_threshold = 0.95;   // original-model decision bound
  double nccd_threshold = 0.5;   // surrogate decision bound
  int nccd_trials = 1;           // wrong-key draws averaged into NCCD
  uint64_t wrongkey_seed = 1337; // first seed of the drawn wrong keys
  bool pearson = false;          // zero-mean (Pearson) NCC variant
};

// Similarity of two equal-shape tensors: non-centered cosine by default,
// optionally mean-centered. All-zero operands are rejected (undefined).
double ncc(const Tensor& a, const Tensor& b, bool pearson = false);

// ncc(m_hat, m) - ncc(m_check, m): correct-key margin over a wrong key.
double nccd(const Tensor& m_hat, const Tensor& m_check, const Tensor& m,
            bool pearson = false);

struct VerificationReport {
  std::string mode;  // "original" | "surrogate"
  double ncc_value = 0.0;
  double ncc_wrong = 0.0;  // surrogate mode: mean wrong-key NCC
  double nccd_value = 0.0; // surrogate mode only
  int decision = 0;
  VerificationPolicy policy;
  std::string key_digest;
  std::vector<uint64_t> wrongkey_seeds;
  std::string g_digest, d_digest;
  std::string timestamp;  // UTC, ISO 8601
};

// m_hat = D(blackbox(G(key))) — the full extraction path, no training.
Tensor decode(const Network& g, const Network& d, const BlackboxFn& blackbox,
              const Key& key);

// Decide ownership of the model behind `blackbox` itself: extract with the
// correct key and compare against the mark.
VerificationReport verify_original(const Network& g, const Network& d,
                                   const BlackboxFn& blackbox, const Key& key,
                                   const Tensor& mark, const VerificationPolicy& policy);

// Decide whether `suspect` descends from the protected model, by the
// correct-vs-wrong-key NCC margin measured on the suspect.
VerificationReport verify_surrogate(const Network& g, const Network& d,
                                    const BlackboxFn& suspect, const Key& key,
                                    const Tensor& mark,
                                    const VerificationPolicy& policy);

// The decision bit as a pure function of stored metrics and policy; audit
// consumers re-derive decisions through this.
int rederive_decision(const VerificationReport& report);

std::string report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const std::string& text);
void save_report(const VerificationReport& report, const std::filesystem::path& path);
VerificationReport load_report(const std::filesystem::path& path);

// UTC wall-clock timestamp, ISO 8601 (e.g. "2026-03-01T12:00:00Z").
std::string utc_timestamp();

}  // namespace shadowmark

#endif  // SHADOWMARK_VERDICT_HPP_
