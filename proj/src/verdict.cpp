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

#include "shadowmark/verdict.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "shadowmark/common.hpp"

namespace shadowmark {

namespace {

using nlohmann::json;

// Computes both norms and the inner product in double precision, with an
// optional mean-centering pass.
double cosine(const Tensor& a, const Tensor& b, bool center) {
  require_shape(b, a.shape, "ncc operand");
  double mean_a = 0.0, mean_b = 0.0;
  if (center) {
    for (int64_t i = 0; i < a.numel(); ++i) {
      mean_a += a[i];
      mean_b += b[i];
    }
    mean_a /= static_cast<double>(a.numel());
    mean_b /= static_cast<double>(b.numel());
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double x = a[i] - mean_a, y = b[i] - mean_b;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0)
    throw Error(center ? "ncc: constant operand has no variance under the Pearson variant"
                       : "ncc: all-zero operand");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

json policy_to_json(const VerificationPolicy& p) {
  return json{{"ncc_threshold", p.ncc_threshold},
              {"nccd_threshold", p.nccd_threshold},
              {"nccd_trials", p.nccd_trials},
              {"wrongkey_seed", p.wrongkey_seed},
              {"pearson", p.pearson}};
}

VerificationPolicy policy_from_json(const json& j) {
  VerificationPolicy p;
  p.ncc_threshold = j.at("ncc_threshold").get<double>();
  p.nccd_threshold = j.at("nccd_threshold").get<double>();
  p.nccd_trials = j.at("nccd_trials").get<int>();
  p.wrongkey_seed = j.at("wrongkey_seed").get<uint64_t>();
  p.pearson = j.at("pearson").get<bool>();
  return p;
}

}  // namespace

double ncc(const Tensor& a, const Tensor& b, bool pearson) {
  return cosine(a, b, pearson);
}

double nccd(const Tensor& m_hat, const Tensor& m_check, const Tensor& m, bool pearson) {
  return ncc(m_hat, m, pearson) - ncc(m_check, m, pearson);
}

Tensor decode(const Network& g, const Network& d, const BlackboxFn& blackbox,
              const Key& key) {
  Tensor trigger = forward(g, key_tensor(key));
  Tensor response = blackbox(trigger);
  require_shape(response, d.spec().input_shape, "blackbox response");
  return forward(d, response);
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

VerificationReport verify_original(const Network& g, const Network& d,
                                   const BlackboxFn& blackbox, const Key& key,
                                   const Tensor& mark,
                                   const VerificationPolicy& policy) {
  VerificationReport r;
  r.mode = "original";
  r.policy = policy;
  r.key_digest = to_hex(key_digest(key));
  r.g_digest = to_hex(g.params_digest());
  r.d_digest = to_hex(d.params_digest());
  r.ncc_value = ncc(decode(g, d, blackbox, key), mark, policy.pearson);
  r.decision = r.ncc_value > policy.ncc_threshold ? 1 : 0;
  r.timestamp = utc_timestamp();
  return r;
}

VerificationReport verify_surrogate(const Network& g, const Network& d,
                                    const BlackboxFn& suspect, const Key& key,
                                    const Tensor& mark,
                                    const VerificationPolicy& policy) {
  if (policy.nccd_trials < 1) throw Error("verify_surrogate: nccd_trials must be >= 1");
  VerificationReport r;
  r.mode = "surrogate";
  r.policy = policy;
  r.key_digest = to_hex(key_digest(key));
  r.g_digest = to_hex(g.params_digest());
  r.d_digest = to_hex(d.params_digest());

  const Tensor m_hat = decode(g, d, suspect, key);
  r.ncc_value = ncc(m_hat, mark, policy.pearson);

  double wrong_sum = 0.0;
  for (int t = 0; t < policy.nccd_trials; ++t) {
    const uint64_t seed = policy.wrongkey_seed + static_cast<uint64_t>(t);
    r.wrongkey_seeds.push_back(seed);
    Rng rng = Rng(seed).derive("verify-wrong-key");
    const Key wrong = sample_wrong_key(key, rng);
    const Tensor m_check = decode(g, d, suspect, wrong);
    wrong_sum += ncc(m_check, mark, policy.pearson);
  }
  r.ncc_wrong = wrong_sum / policy.nccd_trials;
  r.nccd_value = r.ncc_value - r.ncc_wrong;
  r.decision = r.nccd_value > policy.nccd_threshold ? 1 : 0;
  r.timestamp = utc_timestamp();
  return r;
}

int rederive_decision(const VerificationReport& report) {
  if (report.mode == "original")
    return report.ncc_value > report.policy.ncc_threshold ? 1 : 0;
  if (report.mode == "surrogate")
    return report.nccd_value > report.policy.nccd_threshold ? 1 : 0;
  throw Error("rederive_decision: unknown mode " + report.mode);
}

std::string report_to_json(const VerificationReport& r) {
  json j;
  j["mode"] = r.mode;
  j["ncc"] = r.ncc_value;
  j["ncc_wrong"] = r.ncc_wrong;
  j["nccd"] = r.nccd_value;
  j["decision"] = r.decision;
  j["policy"] = policy_to_json(r.policy);
  j["key_digest"] = r.key_digest;
  j["wrongkey_seeds"] = r.wrongkey_seeds;
  j["pipeline_digests"] = {{"g", r.g_digest}, {"d", r.d_digest}};
  j["timestamp"] = r.timestamp;
  return j.dump(2);
}

VerificationReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    VerificationReport r;
    r.mode = j.at("mode").get<std::string>();
    r.ncc_value = j.at("ncc").get<double>();
    r.ncc_wrong = j.at("ncc_wrong").get<double>();
    r.nccd_value = j.at("nccd").get<double>();
    r.decision = j.at("decision").get<int>();
    r.policy = policy_from_json(j.at("policy"));
    r.key_digest = j.at("key_digest").get<std::string>();
    r.wrongkey_seeds = j.at("wrongkey_seeds").get<std::vector<uint64_t>>();
    r.g_digest = j.at("pipeline_digests").at("g").get<std::string>();
    r.d_digest = j.at("pipeline_digests").at("d").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed verification report: ") + e.what());
  }
}

void save_report(const VerificationReport& report, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write report: " + path.string());
  f << report_to_json(report) << "\n";
}

VerificationReport load_report(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read report: " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return report_from_json(text);
}

}  // namespace shadowmark
