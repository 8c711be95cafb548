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

// shadowmark: train, verify, serve, and attack watermark pipelines.
//
//   shadowmark pretrain --modality n2i --out runs/pre-n2i
//   shadowmark protect  --model runs/pre-n2i/model --mark-text "OWNER" --out runs/wm
//   shadowmark verify   --pipeline runs/wm/pipeline --mark runs/wm/mark.f32 \
//                       --key runs/wm/owner.key --mode original --out runs/v1
//   shadowmark attack surrogate|ambush ...
//   shadowmark serve    --pipeline runs/wm/pipeline --mark runs/wm/mark.f32
//   shadowmark report   --in runs --out runs/summary
//
// Every run writes <out>/runconfig.json with the resolved configuration.
// --config loads the same keys from a JSON file; explicit flags win.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "shadowmark/attack_bench.hpp"
#include "shadowmark/checkpoint.hpp"
#include "shadowmark/common.hpp"
#include "shadowmark/data_forge.hpp"
#include "shadowmark/gate.hpp"
#include "shadowmark/keysmith.hpp"
#include "shadowmark/model_zoo.hpp"
#include "shadowmark/network.hpp"
#include "shadowmark/png_io.hpp"
#include "shadowmark/shadow_train.hpp"
#include "shadowmark/tensor.hpp"
#include "shadowmark/verdict.hpp"
#include "shadowmark/viz.hpp"

using namespace shadowmark;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_stop(int) { g_stop = 1; }

// --config JSON is the middle layer: defaults, then file values, then any
// flag the user actually passed.
struct Overlay {
  json file;

  template <typename T>
  T pick(const CLI::Option* opt, const T& flag_value, const std::string& key,
         const T& fallback) const {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (file.contains(key)) return file.at(key).get<T>();
    return fallback;
  }
};

Overlay load_overlay(const std::string& config_path) {
  Overlay o;
  o.file = json::object();
  if (config_path.empty()) return o;
  std::ifstream f(config_path);
  if (!f) throw Error("cannot read config " + config_path);
  try {
    o.file = json::parse(f);
  } catch (const json::exception& e) {
    throw Error("malformed config " + config_path + ": " + e.what());
  }
  if (!o.file.is_object()) throw Error("config must be a JSON object");
  return o;
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw Error("--out is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_runconfig(const fs::path& out_dir, const std::string& command,
                     const json& resolved) {
  json j;
  j["command"] = command;
  j["timestamp"] = utc_timestamp();
  j["config"] = resolved;
  std::ofstream f(out_dir / "runconfig.json", std::ios::trunc);
  if (!f) throw Error("cannot write runconfig.json in " + out_dir.string());
  f << j.dump(2) << "\n";
}

Tensor load_mark_blob(const fs::path& path, Modality modality) {
  const Shape shape = model_output_shape(modality);
  std::vector<float> blob = read_f32_file(path);
  if (static_cast<int64_t>(blob.size()) != shape_numel(shape))
    throw Error("mark file " + path.string() + " holds " +
                std::to_string(blob.size()) + " floats, expected " +
                std::to_string(shape_numel(shape)));
  return Tensor(shape, std::move(blob));
}

// The suspect side of a verification: a checkpointed model, never a piece of
// the verification procedure itself.
Network load_suspect(const fs::path& dir) {
  LoadedCheckpoint ckpt = load_checkpoint(dir);
  if (ckpt.meta.role == Role::kKeyEncoder || ckpt.meta.role == Role::kDecoder)
    throw Error("suspect checkpoint holds a " + role_name(ckpt.meta.role) +
                "; only models can be verified");
  return std::move(ckpt.net);
}

int run_pretrain(const std::string& modality_s, int n, int epochs,
                 uint64_t data_seed, uint64_t seed, const fs::path& out) {
  const Modality modality = modality_from_name(modality_s);
  const auto data = synth_task_dataset(modality, n, data_seed);
  std::printf("pretraining %s on %d samples, %d epochs...\n", modality_s.c_str(),
              n, epochs);
  const auto t0 = std::chrono::steady_clock::now();
  PretrainResult res = pretrain_protected_model(modality, data, epochs, seed);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_protected_model(res.handle, out / "model");
  json meta;
  meta["modality"] = modality_s;
  meta["final_train_loss"] = res.final_train_loss;
  meta["holdout_error"] = res.holdout_error;
  meta["error_ceiling"] = pretrain_error_ceiling(modality);
  meta["model_digest"] = to_hex(res.handle.digest());
  meta["seconds"] = secs;
  std::ofstream f(out / "pretrain.json", std::ios::trunc);
  f << meta.dump(2) << "\n";

  std::printf("pretrained in %.1fs: train %.6f, holdout %.6f (ceiling %.6f)\n",
              secs, res.final_train_loss, res.holdout_error,
              pretrain_error_ceiling(modality));
  std::printf("model saved to %s\n", (out / "model").string().c_str());
  return 0;
}

int run_protect(const fs::path& model_dir, const std::string& mark_text,
                const std::string& mark_png, uint64_t mark_seed, int key_dim,
                uint64_t key_seed, uint64_t g_seed, uint64_t d_seed,
                const TrainConfig& cfg, const fs::path& out) {
  ProtectedModelHandle m = load_protected_model(model_dir);
  const Modality modality = m.modality();
  const Shape mark_shape = model_output_shape(modality);

  Tensor mark = !mark_png.empty() ? load_png(mark_png)
                                  : render_text_mark(mark_text, mark_shape, mark_seed);
  require_shape(mark, mark_shape, "watermark");

  const Key key = keygen(key_dim, key_seed);
  Network g = build_network(Role::kKeyEncoder, modality, key_dim, g_seed);
  Network d = build_network(Role::kDecoder, modality, 0, d_seed);

  std::printf("embedding watermark into %s model (key_dim %d)...\n",
              modality_name(modality).c_str(), key_dim);
  const auto t0 = std::chrono::steady_clock::now();
  TrainedPipeline pipe =
      encode(std::move(g), std::move(d), std::move(m), key, mark, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_pipeline(pipe, out / "pipeline");
  save_key(key, out / "owner.key");
  write_f32_file(out / "mark.f32", mark.data.data(), mark.data.size());
  save_png(mark, out / "mark.png");

  ChartSeries ncc_c{"ncc_correct", {}}, ncc_w{"ncc_wrong_mean", {}};
  ChartSeries lk{"L_k", {}};
  for (const auto& row : pipe.log) {
    ncc_c.y.push_back(row.ncc_correct);
    ncc_w.y.push_back(row.ncc_wrong_mean);
    lk.y.push_back(row.l_k);
  }
  svg_line_chart("key separation", {ncc_c, ncc_w}, out / "ncc_curve.svg");
  svg_line_chart("correct-key loss", {lk}, out / "loss_curve.svg");
  save_png(qualitative_grid(pipe, key, mark, 4, cfg.seed), out / "qualitative.png");

  const EpochLog& last = pipe.log.back();
  std::printf("%s after %zu epochs (%.1fs): ncc %.4f, wrong-key mean %.4f\n",
              pipe.converged ? "converged" : "NOT converged", pipe.log.size(),
              secs, last.ncc_correct, last.ncc_wrong_mean);
  std::printf("artifacts in %s\n", out.string().c_str());
  return pipe.converged ? 0 : 2;
}

int run_verify(const fs::path& pipeline_dir, const fs::path& mark_path,
               const fs::path& key_path, const std::string& mode,
               const fs::path& suspect_dir, const VerificationPolicy& policy,
               const fs::path& out) {
  TrainedPipeline pipe = load_pipeline(pipeline_dir);
  const Tensor mark = load_mark_blob(mark_path, pipe.modality);
  const Key key = load_key(key_path);

  VerificationReport report;
  if (mode == "original") {
    const BlackboxFn bb = [&pipe](const Tensor& x) { return pipe.m.forward(x); };
    report = verify_original(pipe.g, pipe.d, bb, key, mark, policy);
  } else if (mode == "surrogate") {
    if (suspect_dir.empty())
      throw Error("--suspect is required for mode surrogate");
    Network suspect = load_suspect(suspect_dir);
    suspect.freeze();
    const BlackboxFn bb = [&suspect](const Tensor& x) {
      return forward(suspect, x);
    };
    report = verify_surrogate(pipe.g, pipe.d, bb, key, mark, policy);
  } else {
    throw Error("mode must be original or surrogate");
  }

  save_report(report, out / "report.json");
  if (mode == "original")
    std::printf("mode original: ncc %.6f vs threshold %.2f -> decision %d\n",
                report.ncc_value, policy.ncc_threshold, report.decision);
  else
    std::printf("mode surrogate: nccd %.6f vs threshold %.2f -> decision %d\n",
                report.nccd_value, policy.nccd_threshold, report.decision);
  std::printf("report saved to %s\n", (out / "report.json").string().c_str());
  return 0;
}

int run_attack_surrogate(const fs::path& pipeline_dir, const fs::path& mark_path,
                         const fs::path& key_path, int queries,
                         uint64_t query_seed, uint64_t surrogate_seed, int epochs,
                         const VerificationPolicy& policy, const fs::path& out) {
  TrainedPipeline pipe = load_pipeline(pipeline_dir);
  const Tensor mark = load_mark_blob(mark_path, pipe.modality);
  const Key key = load_key(key_path);

  QueryBudget budget;
  budget.n_queries = queries;
  budget.seed = query_seed;
  const BlackboxFn victim = [&pipe](const Tensor& x) { return pipe.m.forward(x); };
  std::printf("harvesting %d black-box queries...\n", queries);
  const DistillSet set = harvest_queries(victim, pipe.modality, budget);

  Network surrogate =
      build_network(Role::kSurrogate, pipe.modality, 0, surrogate_seed);
  std::printf("distilling surrogate for %d epochs...\n", epochs);
  SurrogateResult res =
      train_surrogate(set, std::move(surrogate), epochs, surrogate_seed, pipe.g,
                      pipe.d, key, mark);

  save_checkpoint(res.s, CheckpointMeta{Role::kSurrogate, pipe.modality},
                  out / "surrogate");
  write_transfer_curve(res.log, out / "transfer.csv", out / "transfer.svg");

  res.s.freeze();
  const BlackboxFn stolen = [&res](const Tensor& x) { return forward(res.s, x); };
  const VerificationReport report =
      verify_surrogate(pipe.g, pipe.d, stolen, key, mark, policy);
  save_report(report, out / "report.json");

  json summary;
  summary["type"] = "surrogate-distillation";
  summary["suspect_digest"] = to_hex(res.s.params_digest());
  summary["queries"] = queries;
  summary["epochs"] = epochs;
  summary["final_task_loss"] = res.log.empty() ? 0.0 : res.log.back().task_loss;
  summary["final_ncc_correct"] = res.log.empty() ? 0.0 : res.log.back().ncc_correct;
  summary["final_ncc_wrong"] = res.log.empty() ? 0.0 : res.log.back().ncc_wrong;
  summary["verify_nccd"] = report.nccd_value;
  summary["verify_decision"] = report.decision;
  std::ofstream f(out / "surrogate_attack.json", std::ios::trunc);
  f << summary.dump(2) << "\n";

  std::printf("surrogate nccd %.6f -> decision %d (transfer curve in %s)\n",
              report.nccd_value, report.decision, (out / "transfer.csv").string().c_str());
  return 0;
}

int run_attack_ambush(const fs::path& pipeline_dir, const fs::path& mark_path,
                      int trials, uint64_t seed, double threshold,
                      const fs::path& out) {
  TrainedPipeline pipe = load_pipeline(pipeline_dir);
  const Tensor mark = load_mark_blob(mark_path, pipe.modality);
  const int key_dim = pipe.g.spec().input_shape[0];

  const BlackboxFn bb = [&pipe](const Tensor& x) { return pipe.m.forward(x); };
  std::printf("brute forcing %d random keys (key_dim %d)...\n", trials, key_dim);
  const auto t0 = std::chrono::steady_clock::now();
  AmbushReport report =
      brute_force_ambiguity(pipe.g, pipe.d, bb, mark, key_dim, trials, seed,
                            threshold);
  report.m_digest = to_hex(pipe.m.digest());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_ambush_report(report, out / "ambush.json");
  std::printf(
      "SR_A = %d/%d = %.6f in %.1fs; Wilson 95%% [%.3e, %.3e]\n",
      report.n_success, report.n_trials, report.sr_a, secs, report.wilson_low,
      report.wilson_high);
  return 0;
}

int run_serve(const fs::path& pipeline_dir, const fs::path& mark_path,
              const std::string& host, int port,
              const VerificationPolicy& policy) {
  GateConfig config;
  config.host = host;
  config.port = port;
  config.policy = policy;
  auto gate = Gate::from_artifacts(pipeline_dir, mark_path, config);
  const int bound = gate->start();
  std::printf("serving on %s:%d (POST /infer, POST /verify, /admin/suspect, "
              "GET /audit); Ctrl-C stops\n",
              host.c_str(), bound);
  std::fflush(stdout);

  std::signal(SIGINT, handle_stop);
  std::signal(SIGTERM, handle_stop);
  while (g_stop == 0)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::printf("stopping\n");
  gate->stop();
  return 0;
}

// One row of the aggregate table; "-" marks what a stored artifact does not
// record (verification reports deliberately omit the black box's identity).
struct SummaryRow {
  std::string type, m, g, d, s, mark, ncc, nccd, sr_a;
};

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int run_report(const fs::path& in_dir, const fs::path& out) {
  if (!fs::exists(in_dir)) throw Error("no such directory: " + in_dir.string());
  std::vector<SummaryRow> rows;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(in_dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  for (const auto& p : files) {
    const std::string name = p.filename().string();
    try {
      if (name == "report.json") {
        const VerificationReport r = load_report(p);
        SummaryRow row;
        row.type = "verify-" + r.mode;
        row.m = "-";
        row.g = r.g_digest;
        row.d = r.d_digest;
        row.s = "-";
        row.mark = "-";
        row.ncc = fmt6(r.ncc_value);
        row.nccd = r.mode == "surrogate" ? fmt6(r.nccd_value) : "-";
        row.sr_a = "-";
        rows.push_back(row);
      } else if (name == "ambush.json") {
        const AmbushReport r = load_ambush_report(p);
        SummaryRow row;
        row.type = "key-ambush";
        row.m = r.m_digest.empty() ? "-" : r.m_digest;
        row.g = r.g_digest;
        row.d = r.d_digest;
        row.s = "-";
        row.mark = "-";
        row.ncc = "-";
        row.nccd = "-";
        row.sr_a = fmt6(r.sr_a) + " (" + std::to_string(r.n_success) + "/" +
                   std::to_string(r.n_trials) + ")";
        rows.push_back(row);
      } else if (name == "surrogate_attack.json") {
        std::ifstream f(p);
        const json j = json::parse(f);
        SummaryRow row;
        row.type = j.value("type", "surrogate-distillation");
        row.m = "-";
        row.g = "-";
        row.d = "-";
        row.s = j.value("suspect_digest", "-");
        row.mark = "-";
        row.ncc = fmt6(j.value("final_ncc_correct", 0.0));
        row.nccd = fmt6(j.value("verify_nccd", 0.0));
        row.sr_a = "-";
        rows.push_back(row);
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "skipping %s: %s\n", p.string().c_str(), e.what());
    }
  }

  if (rows.empty()) std::printf("no stored reports under %s\n", in_dir.string().c_str());

  std::ofstream md(out / "summary.md", std::ios::trunc);
  md << "# Verification and attack summary\n\n";
  md << "Aggregated from stored reports under `" << in_dir.string()
     << "`; nothing is recomputed.\n\n";
  md << "| Type | M | G | D | S | m | NCC | NCCD | SR_A |\n";
  md << "|------|---|---|---|---|---|-----|------|------|\n";
  for (const auto& r : rows)
    md << "| " << r.type << " | " << r.m << " | " << r.g << " | " << r.d << " | "
       << r.s << " | " << r.mark << " | " << r.ncc << " | " << r.nccd << " | "
       << r.sr_a << " |\n";

  std::ofstream csv(out / "summary.csv", std::ios::trunc);
  csv << "type, m_digest, g_digest, d_digest, s_digest, mark_digest, ncc, nccd, "
         "sr_a\n";
  for (const auto& r : rows)
    csv << r.type << ", " << r.m << ", " << r.g << ", " << r.d << ", " << r.s
        << ", " << r.mark << ", " << r.ncc << ", " << r.nccd << ", " << r.sr_a
        << "\n";

  std::printf("%zu rows -> %s and %s\n", rows.size(),
              (out / "summary.md").string().c_str(),
              (out / "summary.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ShadowMark: box-free model watermarking over a frozen model"};
  app.require_subcommand(1);

  // pretrain ---------------------------------------------------------------
  auto* pre = app.add_subcommand("pretrain", "train a protected task model");
  std::string pre_modality, pre_config, pre_out;
  int pre_n = 0, pre_epochs = 0;
  uint64_t pre_data_seed = 0, pre_seed = 0;
  pre->add_option("--modality", pre_modality, "i2i, n2i, or nt2i")->required();
  auto* o_pre_n = pre->add_option("--n", pre_n, "dataset size");
  auto* o_pre_ep = pre->add_option("--epochs", pre_epochs, "training epochs");
  auto* o_pre_ds = pre->add_option("--data-seed", pre_data_seed, "dataset seed");
  auto* o_pre_s = pre->add_option("--seed", pre_seed, "training seed");
  pre->add_option("--config", pre_config, "JSON config file");
  pre->add_option("--out", pre_out, "output directory")->required();

  // protect ----------------------------------------------------------------
  auto* pro = app.add_subcommand("protect", "embed a watermark around a model");
  std::string pro_model, pro_mark_text, pro_mark_png, pro_config, pro_out;
  uint64_t pro_mark_seed = 0, pro_key_seed = 0, pro_g_seed = 0, pro_d_seed = 0,
           pro_seed = 0;
  int pro_key_dim = 0, pro_epochs = 0, pro_steps = 0, pro_batch = 0,
      pro_wrong = 0, pro_eval_wrong = 0;
  double pro_lr = 0.0, pro_eps = 0.0, pro_hi = 0.0, pro_lo = 0.0;
  pro->add_option("--model", pro_model, "pretrained model directory")->required();
  auto* o_mtext = pro->add_option("--mark-text", pro_mark_text, "text watermark");
  auto* o_mpng = pro->add_option("--mark-png", pro_mark_png, "PNG watermark");
  auto* o_mseed = pro->add_option("--mark-seed", pro_mark_seed, "mark render seed");
  auto* o_kdim = pro->add_option("--key-dim", pro_key_dim, "key length");
  auto* o_kseed = pro->add_option("--key-seed", pro_key_seed, "key draw seed");
  auto* o_gseed = pro->add_option("--g-seed", pro_g_seed, "encoder init seed");
  auto* o_dseed = pro->add_option("--d-seed", pro_d_seed, "decoder init seed");
  auto* o_ep = pro->add_option("--epochs-max", pro_epochs, "epoch budget");
  auto* o_steps = pro->add_option("--steps-per-epoch", pro_steps, "steps per epoch");
  auto* o_batch = pro->add_option("--normal-batch", pro_batch, "refine batch size");
  auto* o_wrong = pro->add_option("--wrong-keys", pro_wrong, "wrong keys per step");
  auto* o_lr = pro->add_option("--lr", pro_lr, "learning rate");
  auto* o_eps = pro->add_option("--epsilon", pro_eps, "reciprocal-loss floor");
  auto* o_hi = pro->add_option("--ncc-hi", pro_hi, "early-stop correct bound");
  auto* o_lo = pro->add_option("--ncc-lo", pro_lo, "early-stop wrong bound");
  auto* o_ewk = pro->add_option("--eval-wrong-keys", pro_eval_wrong,
                                "wrong keys per evaluation");
  auto* o_seed = pro->add_option("--seed", pro_seed, "training stream seed");
  pro->add_option("--config", pro_config, "JSON config file");
  pro->add_option("--out", pro_out, "output directory")->required();

  // verify -----------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "run the ownership decision");
  std::string ver_pipeline, ver_mark, ver_key, ver_mode = "original",
              ver_suspect, ver_config, ver_out;
  double ver_ncc_thr = 0.0, ver_nccd_thr = 0.0;
  int ver_trials = 0;
  uint64_t ver_wseed = 0;
  bool ver_pearson = false;
  ver->add_option("--pipeline", ver_pipeline, "trained pipeline directory")
      ->required();
  ver->add_option("--mark", ver_mark, "owner mark (f32 blob)")->required();
  ver->add_option("--key", ver_key, "owner key file")->required();
  ver->add_option("--mode", ver_mode, "original or surrogate");
  ver->add_option("--suspect", ver_suspect, "suspect checkpoint (surrogate mode)");
  auto* o_vthr = ver->add_option("--ncc-threshold", ver_ncc_thr, "original bound");
  auto* o_vdthr = ver->add_option("--nccd-threshold", ver_nccd_thr, "surrogate bound");
  auto* o_vtr = ver->add_option("--nccd-trials", ver_trials, "wrong keys in NCCD");
  auto* o_vws = ver->add_option("--wrongkey-seed", ver_wseed, "wrong-key seed base");
  auto* o_vp = ver->add_flag("--pearson", ver_pearson, "mean-centered NCC");
  ver->add_option("--config", ver_config, "JSON config file");
  ver->add_option("--out", ver_out, "output directory")->required();

  // attack -----------------------------------------------------------------
  auto* atk = app.add_subcommand("attack", "stress the watermark");
  atk->require_subcommand(1);
  auto* srg = atk->add_subcommand("surrogate", "distill and re-verify");
  std::string srg_pipeline, srg_mark, srg_key, srg_config, srg_out;
  int srg_queries = 0, srg_epochs = 0;
  uint64_t srg_qseed = 0, srg_sseed = 0;
  srg->add_option("--pipeline", srg_pipeline, "trained pipeline directory")
      ->required();
  srg->add_option("--mark", srg_mark, "owner mark (f32 blob)")->required();
  srg->add_option("--key", srg_key, "owner key file")->required();
  auto* o_sq = srg->add_option("--queries", srg_queries, "query budget");
  auto* o_sqs = srg->add_option("--query-seed", srg_qseed, "query sampler seed");
  auto* o_sss = srg->add_option("--surrogate-seed", srg_sseed, "surrogate seed");
  auto* o_sep = srg->add_option("--epochs", srg_epochs, "distillation epochs");
  srg->add_option("--config", srg_config, "JSON config file");
  srg->add_option("--out", srg_out, "output directory")->required();

  auto* amb = atk->add_subcommand("ambush", "brute-force key ambiguity");
  std::string amb_pipeline, amb_mark, amb_config, amb_out;
  int amb_trials = 0;
  uint64_t amb_seed = 0;
  double amb_thr = 0.0;
  amb->add_option("--pipeline", amb_pipeline, "trained pipeline directory")
      ->required();
  amb->add_option("--mark", amb_mark, "owner mark (f32 blob)")->required();
  auto* o_atr = amb->add_option("--trials", amb_trials, "random key draws");
  auto* o_as = amb->add_option(
      "--seed", amb_seed,
      "first trial seed; keep the range seed..seed+trials clear of any owner "
      "key seed or the owner key itself is \"rediscovered\"");
  auto* o_ath = amb->add_option("--threshold", amb_thr, "per-trial NCC bound");
  amb->add_option("--config", amb_config, "JSON config file");
  amb->add_option("--out", amb_out, "output directory")->required();

  // serve ------------------------------------------------------------------
  auto* srv = app.add_subcommand("serve", "expose the two-channel HTTP API");
  std::string srv_pipeline, srv_mark, srv_host = "127.0.0.1", srv_config;
  int srv_port = 0;
  double srv_ncc_thr = 0.0, srv_nccd_thr = 0.0;
  int srv_trials = 0;
  uint64_t srv_wseed = 0;
  bool srv_pearson = false;
  srv->add_option("--pipeline", srv_pipeline, "trained pipeline directory")
      ->required();
  srv->add_option("--mark", srv_mark, "owner mark (f32 blob)")->required();
  srv->add_option("--host", srv_host, "bind address");
  srv->add_option("--port", srv_port, "port (0 = ephemeral)");
  auto* o_nthr = srv->add_option("--ncc-threshold", srv_ncc_thr, "original bound");
  auto* o_ndthr = srv->add_option("--nccd-threshold", srv_nccd_thr, "surrogate bound");
  auto* o_ntr = srv->add_option("--nccd-trials", srv_trials, "wrong keys in NCCD");
  auto* o_nws = srv->add_option("--wrongkey-seed", srv_wseed, "wrong-key seed base");
  auto* o_np = srv->add_flag("--pearson", srv_pearson, "mean-centered NCC");
  srv->add_option("--config", srv_config, "JSON config file");

  // report -----------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "aggregate stored reports");
  std::string rep_in, rep_out;
  rep->add_option("--in", rep_in, "directory to scan")->required();
  rep->add_option("--out", rep_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      const Overlay ov = load_overlay(pre_config);
      const bool nt2i = modality_from_name(pre_modality) == Modality::kNT2I;
      // The ten-class conditional task needs more data to generalize.
      const int n = ov.pick(o_pre_n, pre_n, "n", nt2i ? 256 : 96);
      const int epochs = ov.pick(o_pre_ep, pre_epochs, "epochs", 30);
      const uint64_t dseed = ov.pick(o_pre_ds, pre_data_seed, "data_seed",
                                     static_cast<uint64_t>(7));
      const uint64_t seed =
          ov.pick(o_pre_s, pre_seed, "seed", static_cast<uint64_t>(11));
      const fs::path out = prepare_out(pre_out);
      write_runconfig(out, "pretrain",
                      json{{"modality", pre_modality},
                           {"n", n},
                           {"epochs", epochs},
                           {"data_seed", dseed},
                           {"seed", seed}});
      return run_pretrain(pre_modality, n, epochs, dseed, seed, out);
    }

    if (pro->parsed()) {
      const Overlay ov = load_overlay(pro_config);
      const std::string mark_text =
          ov.pick(o_mtext, pro_mark_text, "mark_text", std::string{});
      const std::string mark_png =
          ov.pick(o_mpng, pro_mark_png, "mark_png", std::string{});
      if (mark_text.empty() && mark_png.empty())
        throw Error("one of --mark-text or --mark-png is required");
      if (!mark_text.empty() && !mark_png.empty())
        throw Error("--mark-text and --mark-png are mutually exclusive");
      const uint64_t mark_seed = ov.pick(o_mseed, pro_mark_seed, "mark_seed",
                                         static_cast<uint64_t>(5));
      const int key_dim = ov.pick(o_kdim, pro_key_dim, "key_dim", 256);
      const uint64_t key_seed = ov.pick(o_kseed, pro_key_seed, "key_seed",
                                        static_cast<uint64_t>(31));
      const uint64_t g_seed =
          ov.pick(o_gseed, pro_g_seed, "g_seed", static_cast<uint64_t>(21));
      const uint64_t d_seed =
          ov.pick(o_dseed, pro_d_seed, "d_seed", static_cast<uint64_t>(22));
      TrainConfig cfg;
      cfg.epochs_max = ov.pick(o_ep, pro_epochs, "epochs_max", cfg.epochs_max);
      cfg.steps_per_epoch =
          ov.pick(o_steps, pro_steps, "steps_per_epoch", cfg.steps_per_epoch);
      cfg.normal_batch =
          ov.pick(o_batch, pro_batch, "normal_batch", cfg.normal_batch);
      cfg.wrong_keys_per_step =
          ov.pick(o_wrong, pro_wrong, "wrong_keys_per_step", cfg.wrong_keys_per_step);
      cfg.lr = ov.pick(o_lr, pro_lr, "lr", cfg.lr);
      cfg.epsilon = ov.pick(o_eps, pro_eps, "epsilon", cfg.epsilon);
      cfg.ncc_hi = ov.pick(o_hi, pro_hi, "ncc_hi", cfg.ncc_hi);
      cfg.ncc_lo = ov.pick(o_lo, pro_lo, "ncc_lo", cfg.ncc_lo);
      cfg.eval_wrong_keys =
          ov.pick(o_ewk, pro_eval_wrong, "eval_wrong_keys", cfg.eval_wrong_keys);
      cfg.seed = ov.pick(o_seed, pro_seed, "seed", cfg.seed);
      const fs::path out = prepare_out(pro_out);
      write_runconfig(out, "protect",
                      json{{"model", pro_model},
                           {"mark_text", mark_text},
                           {"mark_png", mark_png},
                           {"mark_seed", mark_seed},
                           {"key_dim", key_dim},
                           {"key_seed", key_seed},
                           {"g_seed", g_seed},
                           {"d_seed", d_seed},
                           {"epochs_max", cfg.epochs_max},
                           {"steps_per_epoch", cfg.steps_per_epoch},
                           {"normal_batch", cfg.normal_batch},
                           {"wrong_keys_per_step", cfg.wrong_keys_per_step},
                           {"lr", cfg.lr},
                           {"epsilon", cfg.epsilon},
                           {"ncc_hi", cfg.ncc_hi},
                           {"ncc_lo", cfg.ncc_lo},
                           {"eval_wrong_keys", cfg.eval_wrong_keys},
                           {"seed", cfg.seed}});
      return run_protect(pro_model, mark_text, mark_png, mark_seed, key_dim,
                         key_seed, g_seed, d_seed, cfg, out);
    }

    if (ver->parsed()) {
      const Overlay ov = load_overlay(ver_config);
      VerificationPolicy policy;
      policy.ncc_threshold =
          ov.pick(o_vthr, ver_ncc_thr, "ncc_threshold", policy.ncc_threshold);
      policy.nccd_threshold =
          ov.pick(o_vdthr, ver_nccd_thr, "nccd_threshold", policy.nccd_threshold);
      policy.nccd_trials =
          ov.pick(o_vtr, ver_trials, "nccd_trials", policy.nccd_trials);
      policy.wrongkey_seed =
          ov.pick(o_vws, ver_wseed, "wrongkey_seed", policy.wrongkey_seed);
      policy.pearson = ov.pick(o_vp, ver_pearson, "pearson", policy.pearson);
      const fs::path out = prepare_out(ver_out);
      write_runconfig(out, "verify",
                      json{{"pipeline", ver_pipeline},
                           {"mark", ver_mark},
                           {"key", ver_key},
                           {"mode", ver_mode},
                           {"suspect", ver_suspect},
                           {"ncc_threshold", policy.ncc_threshold},
                           {"nccd_threshold", policy.nccd_threshold},
                           {"nccd_trials", policy.nccd_trials},
                           {"wrongkey_seed", policy.wrongkey_seed},
                           {"pearson", policy.pearson}});
      return run_verify(ver_pipeline, ver_mark, ver_key, ver_mode, ver_suspect,
                        policy, out);
    }

    if (srg->parsed()) {
      const Overlay ov = load_overlay(srg_config);
      const int queries = ov.pick(o_sq, srg_queries, "queries", 2048);
      const uint64_t qseed = ov.pick(o_sqs, srg_qseed, "query_seed",
                                     static_cast<uint64_t>(1));
      const uint64_t sseed = ov.pick(o_sss, srg_sseed, "surrogate_seed",
                                     static_cast<uint64_t>(1));
      const int epochs = ov.pick(o_sep, srg_epochs, "epochs", 30);
      const fs::path out = prepare_out(srg_out);
      write_runconfig(out, "attack surrogate",
                      json{{"pipeline", srg_pipeline},
                           {"mark", srg_mark},
                           {"key", srg_key},
                           {"queries", queries},
                           {"query_seed", qseed},
                           {"surrogate_seed", sseed},
                           {"epochs", epochs}});
      return run_attack_surrogate(srg_pipeline, srg_mark, srg_key, queries,
                                  qseed, sseed, epochs, VerificationPolicy{},
                                  out);
    }

    if (amb->parsed()) {
      const Overlay ov = load_overlay(amb_config);
      const int trials = ov.pick(o_atr, amb_trials, "trials", 10000);
      const uint64_t seed =
          ov.pick(o_as, amb_seed, "seed", static_cast<uint64_t>(1000000));
      const double threshold = ov.pick(o_ath, amb_thr, "threshold", 0.95);
      const fs::path out = prepare_out(amb_out);
      write_runconfig(out, "attack ambush",
                      json{{"pipeline", amb_pipeline},
                           {"mark", amb_mark},
                           {"trials", trials},
                           {"seed", seed},
                           {"threshold", threshold}});
      return run_attack_ambush(amb_pipeline, amb_mark, trials, seed, threshold,
                               out);
    }

    if (srv->parsed()) {
      const Overlay ov = load_overlay(srv_config);
      VerificationPolicy policy;
      policy.ncc_threshold =
          ov.pick(o_nthr, srv_ncc_thr, "ncc_threshold", policy.ncc_threshold);
      policy.nccd_threshold =
          ov.pick(o_ndthr, srv_nccd_thr, "nccd_threshold", policy.nccd_threshold);
      policy.nccd_trials =
          ov.pick(o_ntr, srv_trials, "nccd_trials", policy.nccd_trials);
      policy.wrongkey_seed =
          ov.pick(o_nws, srv_wseed, "wrongkey_seed", policy.wrongkey_seed);
      policy.pearson = ov.pick(o_np, srv_pearson, "pearson", policy.pearson);
      return run_serve(srv_pipeline, srv_mark, srv_host, srv_port, policy);
    }

    if (rep->parsed()) {
      const fs::path out = prepare_out(rep_out);
      write_runconfig(out, "report", json{{"in", rep_in}});
      return run_report(rep_in, out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
