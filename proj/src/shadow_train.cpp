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

#include "shadowmark/shadow_train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shadowmark/checkpoint.hpp"
#include "shadowmark/common.hpp"
#include "shadowmark/data_forge.hpp"
#include "shadowmark/optimizer.hpp"

namespace shadowmark {

namespace {

// Mean-square distance between a (possibly batch-1) output and the mark,
// accumulated in double.
double mean_square_to_mark(const Tensor& out, const Tensor& mark) {
  if (out.numel() % mark.numel() != 0)
    throw Error("output shape " + shape_str(out.shape) + " incompatible with mark " +
                shape_str(mark.shape));
  double s = 0.0;
  const int64_t mn = mark.numel();
  for (int64_t i = 0; i < out.numel(); ++i) {
    const double r = static_cast<double>(out[i]) - mark[i % mn];
    s += r * r;
  }
  return s / static_cast<double>(out.numel());
}

struct ChainTraces {
  ForwardTrace g, m, d;
};

// G -> M -> D forward with all traces kept for the reverse sweep.
ChainTraces chain_forward(const Network& g, const ProtectedModelHandle& m,
                          const Network& d, const Tensor& key_vec) {
  ChainTraces t{forward_trace(g, key_vec), ForwardTrace{}, ForwardTrace{}};
  t.m = m.forward_trace(t.g.output());
  t.d = forward_trace(d, t.m.output());
  return t;
}

// Reverse sweep of the full chain. M contributes input gradients only; its
// parameters never receive an entry.
void chain_backward(const Network& g, const ProtectedModelHandle& m, const Network& d,
                    const ChainTraces& t, const Tensor& grad_out, GradMap* gg,
                    GradMap* gd) {
  Tensor gd_in = backward(d, t.d, grad_out, gd);
  Tensor gm_in = backward(m.network(), t.m, gd_in, nullptr);
  backward(g, t.g, gm_in, gg);
}

// d/d out of the correct-key MSE.
Tensor grad_mse(const Tensor& out, const Tensor& mark, double scale) {
  Tensor g(out.shape);
  const int64_t mn = mark.numel();
  const double n = static_cast<double>(out.numel());
  for (int64_t i = 0; i < out.numel(); ++i) {
    const double r = static_cast<double>(out[i]) - mark[i % mn];
    g[i] = static_cast<float>(scale * 2.0 * r / n);
  }
  return g;
}

// d/d out of the reciprocal loss 1/(msd + eps).
Tensor grad_reciprocal(const Tensor& out, const Tensor& mark, double msd, double eps,
                       double scale) {
  const double denom = (msd + eps) * (msd + eps);
  return grad_mse(out, mark, -scale / denom);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs_max < 1) throw Error("TrainConfig: epochs_max must be >= 1");
  if (steps_per_epoch < 1) throw Error("TrainConfig: steps_per_epoch must be >= 1");
  if (normal_batch < 1) throw Error("TrainConfig: normal_batch must be >= 1");
  if (wrong_keys_per_step < 1) throw Error("TrainConfig: wrong_keys_per_step must be >= 1");
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw Error("TrainConfig: epsilon must satisfy 0 < epsilon << 1");
  if (lr <= 0.0) throw Error("TrainConfig: lr must be positive");
  if (!(ncc_hi > ncc_lo)) throw Error("TrainConfig: ncc_hi must exceed ncc_lo");
  if (eval_wrong_keys < 1) throw Error("TrainConfig: eval_wrong_keys must be >= 1");
}

double loss_correct_key(const Network& g, const Network& d, const ProtectedModelHandle& m,
                        const Key& k, const Tensor& mark) {
  const ChainTraces t = chain_forward(g, m, d, key_tensor(k));
  return mean_square_to_mark(t.d.output(), mark);
}

double loss_wrong_key(const Network& g, const Network& d, const ProtectedModelHandle& m,
                      const Key& wrong, const Tensor& mark, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("loss_wrong_key: epsilon must be positive");
  const ChainTraces t = chain_forward(g, m, d, key_tensor(wrong));
  return 1.0 / (mean_square_to_mark(t.d.output(), mark) + epsilon);
}

double loss_refine(const Network& d, const ProtectedModelHandle& m, const Tensor& x,
                   const Tensor& mark, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("loss_refine: epsilon must be positive");
  const Tensor y = m.forward(x);
  const Tensor out = forward(d, y);
  return 1.0 / (mean_square_to_mark(out, mark) + epsilon);
}

TrainedPipeline encode(Network g, Network d, ProtectedModelHandle m, const Key& key,
                       const Tensor& mark, const TrainConfig& config) {
  config.validate();
  require_shape(mark, model_output_shape(m.modality()), "watermark");
  require_finite(mark, "watermark");
  if (g.spec().input_shape != Shape{key.dim()})
    throw Error("encode: key dimension " + std::to_string(key.dim()) +
                " does not match key encoder input " + shape_str(g.spec().input_shape));
  if (g.spec().output_shape != model_input_shape(m.modality()))
    throw Error("encode: key encoder output does not feed the protected model");
  if (d.spec().input_shape != model_output_shape(m.modality()))
    throw Error("encode: decoder input does not match the protected model output");

  const uint64_t m_digest_before = m.digest();
  m.check_integrity();

  const Modality modality = m.modality();
  const Tensor key_vec = key_tensor(key);
  AdamOptimizer opt_g(config.lr), opt_d(config.lr);
  Rng root(config.seed);
  Rng rng_wrong = root.derive("encode-wrong-keys");
  Rng rng_query = root.derive("encode-query-seeds");
  Rng rng_eval = root.derive("encode-eval");

  TrainedPipeline pipe{std::move(g), std::move(d), std::move(m), modality,
                       mark.digest(),  key_digest(key), {},       false};

  const auto forward_m = [&pipe](const Tensor& x) { return pipe.m.forward(x); };

  for (int epoch = 0; epoch < config.epochs_max; ++epoch) {
    double sum_lk = 0.0, sum_lw = 0.0, sum_lx = 0.0;

    for (int step = 0; step < config.steps_per_epoch; ++step) {
      GradMap gg, gd;

      // Correct key: pull D(M(G(k))) toward the mark.
      {
        const ChainTraces t = chain_forward(pipe.g, pipe.m, pipe.d, key_vec);
        const double lk = mean_square_to_mark(t.d.output(), mark);
        sum_lk += lk;
        chain_backward(pipe.g, pipe.m, pipe.d, t,
                       grad_mse(t.d.output(), mark, 1.0), &gg, &gd);
      }

      // Fresh wrong keys: push their extractions away from the mark.
      for (int wk = 0; wk < config.wrong_keys_per_step; ++wk) {
        const double scale = 1.0 / config.wrong_keys_per_step;
        const Key wrong = sample_wrong_key(key, rng_wrong);
        const ChainTraces t = chain_forward(pipe.g, pipe.m, pipe.d, key_tensor(wrong));
        const double msd = mean_square_to_mark(t.d.output(), mark);
        sum_lw += scale / (msd + config.epsilon);
        chain_backward(pipe.g, pipe.m, pipe.d, t,
                       grad_reciprocal(t.d.output(), mark, msd, config.epsilon, scale),
                       &gg, &gd);
      }

      // Normal queries: teach D to reject non-encoded traffic. Gradient
      // reaches the decoder only; G is not on this path.
      {
        const uint64_t qseed = (static_cast<uint64_t>(rng_query.next_u32()) << 32) |
                               rng_query.next_u32();
        const auto samples = synth_task_dataset(modality, config.normal_batch, qseed);
        Shape bshape{config.normal_batch};
        const Shape& in_shape = model_input_shape(modality);
        bshape.insert(bshape.end(), in_shape.begin(), in_shape.end());
        Tensor batch(bshape);
        const int64_t per = shape_numel(in_shape);
        for (int s = 0; s < config.normal_batch; ++s)
          std::copy(samples[static_cast<size_t>(s)].input.data.begin(),
                    samples[static_cast<size_t>(s)].input.data.end(),
                    batch.data.begin() + s * per);

        const Tensor y = pipe.m.forward(batch);
        const ForwardTrace td = forward_trace(pipe.d, y);
        const Tensor& out = td.output();
        const int64_t el = mark.numel();
        Tensor gout(out.shape);
        for (int s = 0; s < config.normal_batch; ++s) {
          double msd = 0.0;
          for (int64_t i = 0; i < el; ++i) {
            const double r = static_cast<double>(out[s * el + i]) - mark[i];
            msd += r * r;
          }
          msd /= static_cast<double>(el);
          sum_lx += 1.0 / (msd + config.epsilon) / config.normal_batch;
          const double denom = (msd + config.epsilon) * (msd + config.epsilon);
          for (int64_t i = 0; i < el; ++i) {
            const double r = static_cast<double>(out[s * el + i]) - mark[i];
            gout[s * el + i] = static_cast<float>(
                -2.0 * r / static_cast<double>(el) / denom / config.normal_batch);
          }
        }
        backward(pipe.d, td, gout, &gd);
      }

      opt_g.step(pipe.g, gg);
      opt_d.step(pipe.d, gd);
    }

    EpochLog row;
    row.epoch = epoch + 1;
    row.l_k = sum_lk / config.steps_per_epoch;
    row.l_wrongk = sum_lw / config.steps_per_epoch;
    row.l_x = sum_lx / config.steps_per_epoch;
    if (!std::isfinite(row.l_k) || !std::isfinite(row.l_wrongk) || !std::isfinite(row.l_x))
      throw Error("encode: diverged at epoch " + std::to_string(row.epoch) +
                  " (non-finite loss: L_k=" + std::to_string(row.l_k) +
                  " L_wrongk=" + std::to_string(row.l_wrongk) +
                  " L_x=" + std::to_string(row.l_x) + ")");

    row.ncc_correct = ncc(decode(pipe.g, pipe.d, forward_m, key), mark);
    double wrong_sum = 0.0;
    for (int i = 0; i < config.eval_wrong_keys; ++i) {
      const Key wrong = sample_wrong_key(key, rng_eval);
      wrong_sum += ncc(decode(pipe.g, pipe.d, forward_m, wrong), mark);
    }
    row.ncc_wrong_mean = wrong_sum / config.eval_wrong_keys;
    pipe.log.push_back(row);

    if (row.ncc_correct >= config.ncc_hi && row.ncc_wrong_mean <= config.ncc_lo) {
      pipe.converged = true;
      break;
    }
  }

  pipe.m.check_integrity();
  if (pipe.m.digest() != m_digest_before)
    throw Error("encode: protected model digest changed during training");
  return pipe;
}

void write_training_log(const std::vector<EpochLog>& log,
                        const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write training log: " + path.string());
  f << "epoch, L_k, L_wrongk, L_x, ncc_correct, ncc_wrong_mean\n";
  for (const auto& r : log) {
    std::ostringstream line;
    line.precision(9);
    line << r.epoch << ", " << r.l_k << ", " << r.l_wrongk << ", " << r.l_x << ", "
         << r.ncc_correct << ", " << r.ncc_wrong_mean;
    f << line.str() << "\n";
  }
}

std::vector<EpochLog> read_training_log(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read training log: " + path.string());
  std::string header;
  std::getline(f, header);
  if (header.find("epoch") != 0)
    throw Error("malformed training log header in " + path.string());
  std::vector<EpochLog> log;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    EpochLog r;
    if (!(ss >> r.epoch >> r.l_k >> r.l_wrongk >> r.l_x >> r.ncc_correct >>
          r.ncc_wrong_mean))
      throw Error("malformed training log row in " + path.string() + ": " + line);
    log.push_back(r);
  }
  return log;
}

void save_pipeline(const TrainedPipeline& pipeline, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_checkpoint(pipeline.g, CheckpointMeta{Role::kKeyEncoder, pipeline.modality},
                  dir / "g");
  save_checkpoint(pipeline.d, CheckpointMeta{Role::kDecoder, pipeline.modality},
                  dir / "d");
  save_protected_model(pipeline.m, dir / "m");
  write_training_log(pipeline.log, dir / "log.csv");

  nlohmann::json j;
  j["modality"] = modality_name(pipeline.modality);
  j["mark_digest"] = to_hex(pipeline.mark_digest);
  j["key_digest"] = to_hex(pipeline.key_digest);
  j["converged"] = pipeline.converged;
  std::ofstream f(dir / "pipeline.json", std::ios::trunc);
  if (!f) throw Error("cannot write pipeline manifest: " + (dir / "pipeline.json").string());
  f << j.dump(2) << "\n";
}

TrainedPipeline load_pipeline(const std::filesystem::path& dir) {
  std::ifstream f(dir / "pipeline.json");
  if (!f) throw Error("cannot read pipeline manifest: " + (dir / "pipeline.json").string());
  nlohmann::json j;
  try {
    f >> j;
    LoadedCheckpoint g = load_checkpoint(dir / "g");
    LoadedCheckpoint d = load_checkpoint(dir / "d");
    if (g.meta.role != Role::kKeyEncoder)
      throw Error("pipeline g checkpoint has wrong role " + role_name(g.meta.role));
    if (d.meta.role != Role::kDecoder)
      throw Error("pipeline d checkpoint has wrong role " + role_name(d.meta.role));

    TrainedPipeline pipe{std::move(g.net),
                         std::move(d.net),
                         load_protected_model(dir / "m"),
                         modality_from_name(j.at("modality").get<std::string>()),
                         from_hex(j.at("mark_digest").get<std::string>()),
                         from_hex(j.at("key_digest").get<std::string>()),
                         read_training_log(dir / "log.csv"),
                         j.at("converged").get<bool>()};
    return pipe;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed pipeline manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace shadowmark
