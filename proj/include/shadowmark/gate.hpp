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

#ifndef SHADOWMARK_GATE_HPP_
#define SHADOWMARK_GATE_HPP_

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shadowmark/model_zoo.hpp"
#include "shadowmark/shadow_train.hpp"
#include "shadowmark/verdict.hpp"

namespace httplib {
class Server;
}

namespace shadowmark {

// The verification procedure shipped with this build; not changeable while
// the service runs, and stamped into every audit entry.
inline constexpr const char* kVerifyProcedureVersion = "shadowmark-verify/1";

struct GateConfig {
  std::string host = "127.0.0.1";  // admin surface assumes a local bind
  int port = 0;                    // 0 picks an ephemeral port
  VerificationPolicy policy;
};

// The two-channel service around one trained pipeline: an inference channel
// that exposes exactly the protected model's behavior, and a verification
// channel driven by a key. Intermediate tensors never leave the process.
//
//   POST /infer           {"x": <b64 f32>, "shape": [...]} -> {"y", "shape"}
//   POST /verify          {"key": <b64 f32>, "mode": "original"|"surrogate"}
//                         -> {"mark", "shape", "report"}
//   POST /admin/suspect   {"checkpoint_path": ...}
//   DELETE /admin/suspect
//   GET  /audit           append-only JSON lines
class Gate {
 public:
  // Fails (throws) when the pipeline's stored digests do not verify.
  Gate(TrainedPipeline pipeline, Tensor mark, GateConfig config);
  ~Gate();

  Gate(const Gate&) = delete;
  Gate& operator=(const Gate&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  int port() const { return port_; }

  // Loads the saved pipeline and the f32 mark blob, re-checks the mark
  // digest recorded at training time, and wraps them in a gate.
  static std::unique_ptr<Gate> from_artifacts(const std::filesystem::path& pipeline_dir,
                                              const std::filesystem::path& mark_path,
                                              GateConfig config);

 private:
  void route();
  // `payload_json` is a serialized JSON object merged into the entry.
  void append_audit(const std::string& event, const std::string& payload_json);

  TrainedPipeline pipeline_;
  Tensor mark_;
  GateConfig config_;

  std::unique_ptr<httplib::Server> server_;
  std::thread serve_thread_;
  int port_ = 0;

  mutable std::mutex state_mu_;  // guards suspect_ and audit_
  std::optional<ProtectedModelHandle> suspect_;
  std::string suspect_digest_;
  std::vector<std::string> audit_;
  uint64_t audit_seq_ = 0;
};

}  // namespace shadowmark

#endif  // SHADOWMARK_GATE_HPP_
