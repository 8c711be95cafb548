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

#include "shadowmark/gate.hpp"

#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "shadowmark/checkpoint.hpp"
#include "shadowmark/common.hpp"
#include "shadowmark/wire.hpp"

namespace shadowmark {

using nlohmann::json;

namespace {

// Uniform error body; the message is operator-facing.
void fail(httplib::Response& res, int status, const std::string& message) {
  json j;
  j["error"] = message;
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

Shape shape_from_json(const json& j) {
  Shape s;
  for (const auto& v : j) {
    const int64_t d = v.get<int64_t>();
    if (d < 1 || d > (1 << 24)) throw Error("bad shape entry " + std::to_string(d));
    s.push_back(static_cast<int>(d));
  }
  if (s.empty()) throw Error("empty shape");
  return s;
}

json shape_to_json(const Shape& s) {
  json j = json::array();
  for (int d : s) j.push_back(d);
  return j;
}

}  // namespace

Gate::Gate(TrainedPipeline pipeline, Tensor mark, GateConfig config)
    : pipeline_(std::move(pipeline)), mark_(std::move(mark)), config_(config) {
  // Refuse to hold state that does not verify.
  pipeline_.m.check_integrity();
  require_shape(mark_, model_output_shape(pipeline_.modality), "served watermark");
  if (mark_.digest() != pipeline_.mark_digest)
    throw Error("served watermark digest does not match the trained pipeline");
  server_ = std::make_unique<httplib::Server>();
  route();
}

Gate::~Gate() { stop(); }

std::unique_ptr<Gate> Gate::from_artifacts(const std::filesystem::path& pipeline_dir,
                                           const std::filesystem::path& mark_path,
                                           GateConfig config) {
  TrainedPipeline pipe = load_pipeline(pipeline_dir);
  const Shape mark_shape = model_output_shape(pipe.modality);
  std::vector<float> blob = read_f32_file(mark_path);
  if (static_cast<int64_t>(blob.size()) != shape_numel(mark_shape))
    throw Error("mark file " + mark_path.string() + " holds " +
                std::to_string(blob.size()) + " floats, expected " +
                std::to_string(shape_numel(mark_shape)));
  Tensor mark(mark_shape, std::move(blob));
  return std::make_unique<Gate>(std::move(pipe), std::move(mark), config);
}

void Gate::append_audit(const std::string& event, const std::string& payload_json) {
  json entry;
  entry["seq"] = audit_seq_++;
  entry["event"] = event;
  entry["procedure"] = kVerifyProcedureVersion;
  entry["timestamp"] = utc_timestamp();
  if (!payload_json.empty()) entry["detail"] = json::parse(payload_json);
  audit_.push_back(entry.dump());
}

void Gate::route() {
  auto& svr = *server_;

  svr.Post("/infer", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = json::parse(req.body);
      if (body.contains("key"))
        return fail(res, 400,
                    "channel exclusivity: /infer takes x only, never a key");
      if (!body.contains("x") || !body.contains("shape"))
        return fail(res, 400, "expected fields x and shape");
      const Shape shape = shape_from_json(body.at("shape"));
      if (shape != model_input_shape(pipeline_.modality))
        return fail(res, 400,
                    "query shape " + shape_str(shape) + " does not match " +
                        shape_str(model_input_shape(pipeline_.modality)));
      const Tensor x = tensor_from_b64(body.at("x").get<std::string>(), shape);
      // Inference always runs the original protected model; the suspect slot
      // belongs to the verification channel alone.
      const Tensor y = pipeline_.m.forward(x);
      json out;
      out["y"] = tensor_to_b64(y);
      out["shape"] = shape_to_json(y.shape);
      res.set_content(out.dump(2) + "\n", "application/json");
    } catch (const std::exception& e) {
      fail(res, 400, e.what());
    }
  });

  svr.Post("/verify", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = json::parse(req.body);
      if (body.contains("x"))
        return fail(res, 400,
                    "channel exclusivity: /verify takes a key only, never x");
      if (!body.contains("key") || !body.contains("mode"))
        return fail(res, 400, "expected fields key and mode");
      const std::string mode = body.at("mode").get<std::string>();
      if (mode != "original" && mode != "surrogate")
        return fail(res, 400, "mode must be original or surrogate");

      const int key_dim = pipeline_.g.spec().input_shape[0];
      const std::vector<uint8_t> key_bytes =
          base64_decode(body.at("key").get<std::string>());
      if (key_bytes.size() != static_cast<size_t>(key_dim) * sizeof(float))
        return fail(res, 400,
                    "wrong key length: expected " + std::to_string(key_dim) +
                        " float32 values (" + std::to_string(key_dim * 4) +
                        " bytes)");
      Key key;
      key.values.resize(static_cast<size_t>(key_dim));
      std::memcpy(key.values.data(), key_bytes.data(), key_bytes.size());

      // One lock span keeps the report, the returned mark, and the audit
      // entry consistent with a single slot state.
      VerificationReport report;
      Tensor m_hat;
      {
        std::lock_guard<std::mutex> lock(state_mu_);
        if (mode == "surrogate") {
          if (!suspect_)
            return fail(res, 409, "mode surrogate requires a slotted suspect");
          const ProtectedModelHandle& suspect = *suspect_;
          const BlackboxFn bb = [&suspect](const Tensor& t) {
            return suspect.forward(t);
          };
          report = verify_surrogate(pipeline_.g, pipeline_.d, bb, key, mark_,
                                    config_.policy);
          m_hat = decode(pipeline_.g, pipeline_.d, bb, key);
        } else {
          if (suspect_)
            return fail(res, 409,
                        "a suspect is slotted; mode original unavailable until "
                        "DELETE /admin/suspect");
          const BlackboxFn bb = [this](const Tensor& t) {
            return pipeline_.m.forward(t);
          };
          report = verify_original(pipeline_.g, pipeline_.d, bb, key, mark_,
                                   config_.policy);
          m_hat = decode(pipeline_.g, pipeline_.d, bb, key);
        }
        append_audit("verify", report_to_json(report));
      }

      // The response carries the extracted mark and the report, nothing
      // else: trigger and response intermediates stay in-process.
      json out;
      out["mark"] = tensor_to_b64(m_hat);
      out["shape"] = shape_to_json(m_hat.shape);
      out["report"] = json::parse(report_to_json(report));
      res.set_content(out.dump(2) + "\n", "application/json");
    } catch (const std::exception& e) {
      fail(res, 400, e.what());
    }
  });

  svr.Post("/admin/suspect",
           [this](const httplib::Request& req, httplib::Response& res) {
             try {
               const json body = json::parse(req.body);
               const std::string path =
                   body.at("checkpoint_path").get<std::string>();
               LoadedCheckpoint ckpt = load_checkpoint(path);
               if (ckpt.meta.role == Role::kKeyEncoder ||
                   ckpt.meta.role == Role::kDecoder)
                 return fail(res, 403,
                             "only the model slot is replaceable; the "
                             "verification procedure is fixed");
               const Shape in = ckpt.net.spec().input_shape;
               const Shape out_shape = ckpt.net.spec().output_shape;
               if (in != pipeline_.g.spec().output_shape ||
                   out_shape != pipeline_.d.spec().input_shape)
                 return fail(res, 400,
                             "suspect shapes " + shape_str(in) + " -> " +
                                 shape_str(out_shape) +
                                 " are not compatible with the pipeline");
               ckpt.net.freeze();
               ProtectedModelHandle handle(std::move(ckpt.net),
                                           pipeline_.modality);
               json detail;
               detail["suspect_digest"] = to_hex(handle.digest());
               detail["checkpoint_path"] = path;
               {
                 std::lock_guard<std::mutex> lock(state_mu_);
                 suspect_digest_ = to_hex(handle.digest());
                 suspect_.emplace(std::move(handle));
                 append_audit("slot_in", detail.dump());
               }
               json out;
               out["suspect_digest"] = detail["suspect_digest"];
               res.set_content(out.dump(2) + "\n", "application/json");
             } catch (const std::exception& e) {
               fail(res, 400, e.what());
             }
           });

  svr.Delete("/admin/suspect",
             [this](const httplib::Request&, httplib::Response& res) {
               std::lock_guard<std::mutex> lock(state_mu_);
               if (!suspect_) return fail(res, 404, "no suspect slotted");
               json detail;
               detail["suspect_digest"] = suspect_digest_;
               suspect_.reset();
               suspect_digest_.clear();
               append_audit("slot_out", detail.dump());
               res.set_content("{}\n", "application/json");
             });

  svr.Get("/audit", [this](const httplib::Request&, httplib::Response& res) {
    std::ostringstream out;
    {
      std::lock_guard<std::mutex> lock(state_mu_);
      for (const auto& line : audit_) out << line << "\n";
    }
    res.set_content(out.str(), "application/x-ndjson");
  });
}

int Gate::start() {
  if (serve_thread_.joinable()) throw Error("gate already started");
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
    if (port_ <= 0) throw Error("gate failed to bind " + config_.host);
  } else {
    if (!server_->bind_to_port(config_.host, config_.port))
      throw Error("gate failed to bind " + config_.host + ":" +
                  std::to_string(config_.port));
    port_ = config_.port;
  }
  {
    std::lock_guard<std::mutex> lock(state_mu_);
    json detail;
    detail["g_digest"] = to_hex(pipeline_.g.params_digest());
    detail["d_digest"] = to_hex(pipeline_.d.params_digest());
    detail["m_digest"] = to_hex(pipeline_.m.digest());
    detail["mark_digest"] = to_hex(mark_.digest());
    append_audit("start", detail.dump());
  }
  serve_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Gate::stop() {
  if (!server_) return;
  server_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
}

}  // namespace shadowmark
