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

#include "shadowmark/attack_bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shadowmark/common.hpp"
#include "shadowmark/data_forge.hpp"
#include "shadowmark/optimizer.hpp"
#include "shadowmark/viz.hpp"

namespace shadowmark {

namespace {

// Distillation batches mirror the pretraining recipe.
constexpr int kBatch = 8;
constexpr double kDistillLr = 1e-3;

// A constant or all-zero extraction carries no evidence of the mark. Attack
// trials score it as 0 instead of propagating the degenerate-input error,
// which would otherwise escape an OpenMP region and abort the run.
double evidence_ncc(const Tensor& extracted, const Tensor& mark) {
  try {
    return ncc(extracted, mark);
  } catch (const Error&) {
    return 0.0;
  }
}

Tensor stack_batch(const DistillSet& set, const std::vector<int>& order, int first,
                   int count, bool inputs) {
  const Tensor& proto = inputs ? set[0].x : set[0].y;
  Shape bshape{count};
  bshape.insert(bshape.end(), proto.shape.begin(), proto.shape.end());
  Tensor batch(bshape);
  const int64_t per = proto.numel();
  for (int i = 0; i < count; ++i) {
    const Tensor& src =
        inputs ? set[static_cast<size_t>(order[first + i])].x
               : set[static_cast<size_t>(order[first + i])].y;
    std::copy(src.data.begin(), src.data.end(), batch.data.begin() + i * per);
  }
  return batch;
}

}  // namespace

void QueryBudget::validate() const {
  if (n_queries < 1) throw Error("QueryBudget: n_queries must be >= 1");
}

DistillSet harvest_queries(const BlackboxFn& blackbox, Modality modality,
                           const QueryBudget& budget) {
  budget.validate();
  const auto samples = synth_task_dataset(modality, budget.n_queries, budget.seed);
  DistillSet set;
  set.reserve(samples.size());
  for (const auto& s : samples) set.push_back({s.input, blackbox(s.input)});
  return set;
}

SurrogateResult train_surrogate(const DistillSet& set, Network surrogate, int epochs,
                                uint64_t seed, const Network& g, const Network& d,
                                const Key& key, const Tensor& mark) {
  if (epochs < 0) throw Error("train_surrogate: epochs must be >= 0");
  if (set.empty()) throw Error("train_surrogate: empty distillation set");
  for (const auto& p : set) {
    require_shape(p.x, set[0].x.shape, "distillation input");
    require_shape(p.y, set[0].y.shape, "distillation output");
  }
  if (surrogate.spec().input_shape != set[0].x.shape)
    throw Error("train_surrogate: surrogate input " +
                shape_str(surrogate.spec().input_shape) + " does not match queries " +
                shape_str(set[0].x.shape));
  if (surrogate.spec().output_shape != set[0].y.shape)
    throw Error("train_surrogate: surrogate output " +
                shape_str(surrogate.spec().output_shape) +
                " does not match responses " + shape_str(set[0].y.shape));

  SurrogateResult result{std::move(surrogate), {}};
  AdamOptimizer opt(kDistillLr);
  Rng rng = Rng(seed).derive("surrogate-shuffle");
  Rng wrong_rng = Rng(seed).derive("surrogate-wrong-key");
  const Key wrong = sample_wrong_key(key, wrong_rng);

  std::vector<int> order(set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates reshuffle each epoch.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_u32() % static_cast<uint32_t>(i + 1));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    int batches = 0;
    for (int first = 0; first + kBatch <= static_cast<int>(set.size());
         first += kBatch) {
      const Tensor bx = stack_batch(set, order, first, kBatch, true);
      const Tensor by = stack_batch(set, order, first, kBatch, false);
      const ForwardTrace trace = forward_trace(result.s, bx);
      const Tensor& out = trace.output();

      double mse = 0.0;
      Tensor gout(out.shape);
      const double n = static_cast<double>(out.numel());
      for (int64_t i = 0; i < out.numel(); ++i) {
        const double r = static_cast<double>(out[i]) - by[i];
        mse += r * r;
        gout[i] = static_cast<float>(2.0 * r / n);
      }
      mse /= n;
      loss_sum += mse;
      ++batches;

      GradMap grads;
      backward(result.s, trace, gout, &grads);
      opt.step(result.s, grads);
    }

    SurrogateEpochLog row;
    row.epoch = epoch + 1;
    row.task_loss = loss_sum / std::max(batches, 1);
    if (!std::isfinite(row.task_loss))
      throw Error("train_surrogate: diverged at epoch " + std::to_string(row.epoch) +
                  " (non-finite task loss)");
    const BlackboxFn via_s = [&result](const Tensor& x) {
      return forward(result.s, x);
    };
    row.ncc_correct = evidence_ncc(decode(g, d, via_s, key), mark);
    row.ncc_wrong = evidence_ncc(decode(g, d, via_s, wrong), mark);
    result.log.push_back(row);
  }
  return result;
}

void wilson_interval(int successes, int trials, double* low, double* high) {
  if (trials < 1) throw Error("wilson_interval: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw Error("wilson_interval: successes out of range");
  const double z = 1.959963984540054;  // two-sided 95%
  const double n = trials;
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  *low = std::max(0.0, center - half);
  *high = std::min(1.0, center + half);
}

AmbushReport brute_force_ambiguity(const Network& g, const Network& d,
                                   const BlackboxFn& blackbox, const Tensor& mark,
                                   int key_dim, int n_trials, uint64_t seed,
                                   double ncc_threshold,
                                   const std::vector<Key>& planted) {
  if (n_trials < 1) throw Error("brute_force_ambiguity: n_trials must be >= 1");
  if (g.spec().input_shape != Shape{key_dim})
    throw Error("brute_force_ambiguity: key_dim " + std::to_string(key_dim) +
                " does not match the key encoder input");

  const int total = n_trials + static_cast<int>(planted.size());
  // Structural failures (shape mismatches, bad blackbox) must surface as
  // exceptions, which cannot cross the parallel region; probe once up front.
  (void)decode(g, d, blackbox, keygen(key_dim, seed));
  int success = 0;
#pragma omp parallel for schedule(static) reduction(+ : success)
  for (int t = 0; t < total; ++t) {
    const Key trial = t < n_trials
                          ? keygen(key_dim, seed + static_cast<uint64_t>(t))
                          : planted[static_cast<size_t>(t - n_trials)];
    const double v = evidence_ncc(decode(g, d, blackbox, trial), mark);
    if (v > ncc_threshold) success += 1;
  }

  AmbushReport r;
  r.n_trials = total;
  r.n_success = success;
  r.sr_a = static_cast<double>(success) / total;
  r.ncc_threshold = ncc_threshold;
  wilson_interval(success, total, &r.wilson_low, &r.wilson_high);
  r.seed = seed;
  r.key_dim = key_dim;
  r.g_digest = to_hex(g.params_digest());
  r.d_digest = to_hex(d.params_digest());
  r.timestamp = utc_timestamp();
  return r;
}

std::string ambush_to_json(const AmbushReport& r) {
  nlohmann::json j;
  j["n_trials"] = r.n_trials;
  j["n_success"] = r.n_success;
  j["sr_a"] = r.sr_a;
  j["ncc_threshold"] = r.ncc_threshold;
  j["wilson95"] = {r.wilson_low, r.wilson_high};
  j["seed"] = r.seed;
  j["key_dim"] = r.key_dim;
  j["trial_seed_scheme"] = "keygen(key_dim, seed + trial_index)";
  j["pipeline_digests"] = {{"g", r.g_digest}, {"d", r.d_digest}, {"m", r.m_digest}};
  j["timestamp"] = r.timestamp;
  return j.dump(2);
}

AmbushReport ambush_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    AmbushReport r;
    r.n_trials = j.at("n_trials").get<int>();
    r.n_success = j.at("n_success").get<int>();
    r.sr_a = j.at("sr_a").get<double>();
    r.ncc_threshold = j.at("ncc_threshold").get<double>();
    r.wilson_low = j.at("wilson95").at(0).get<double>();
    r.wilson_high = j.at("wilson95").at(1).get<double>();
    r.seed = j.at("seed").get<uint64_t>();
    r.key_dim = j.at("key_dim").get<int>();
    r.g_digest = j.at("pipeline_digests").at("g").get<std::string>();
    r.d_digest = j.at("pipeline_digests").at("d").get<std::string>();
    r.m_digest = j.at("pipeline_digests").at("m").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    if (r.sr_a < 0.0 || r.sr_a > 1.0)
      throw Error("ambush report: sr_a outside [0, 1]");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ambush report: ") + e.what());
  }
}

void save_ambush_report(const AmbushReport& report, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write ambush report: " + path.string());
  f << ambush_to_json(report) << "\n";
}

AmbushReport load_ambush_report(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read ambush report: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ambush_from_json(ss.str());
}

void write_transfer_curve(const std::vector<SurrogateEpochLog>& log,
                          const std::filesystem::path& csv_path,
                          const std::filesystem::path& svg_path) {
  if (log.empty()) throw Error("write_transfer_curve: empty surrogate log");
  std::ofstream f(csv_path, std::ios::trunc);
  if (!f) throw Error("cannot write transfer curve: " + csv_path.string());
  f << "epoch, task_loss, ncc_correct, ncc_wrong\n";
  for (const auto& r : log) {
    std::ostringstream line;
    line.precision(9);
    line << r.epoch << ", " << r.task_loss << ", " << r.ncc_correct << ", "
         << r.ncc_wrong;
    f << line.str() << "\n";
  }

  ChartSeries loss{"task_loss", {}}, correct{"ncc_correct", {}}, wrong{"ncc_wrong", {}};
  for (const auto& r : log) {
    loss.y.push_back(r.task_loss);
    correct.y.push_back(r.ncc_correct);
    wrong.y.push_back(r.ncc_wrong);
  }
  svg_line_chart("surrogate transfer", {loss, correct, wrong}, svg_path);
}

std::vector<SurrogateEpochLog> read_transfer_curve(
    const std::filesystem::path& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw Error("cannot read transfer curve: " + csv_path.string());
  std::string header;
  std::getline(f, header);
  if (header.find("epoch") != 0)
    throw Error("malformed transfer curve header in " + csv_path.string());
  std::vector<SurrogateEpochLog> log;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    SurrogateEpochLog r;
    if (!(ss >> r.epoch >> r.task_loss >> r.ncc_correct >> r.ncc_wrong))
      throw Error("malformed transfer curve row in " + csv_path.string() + ": " + line);
    log.push_back(r);
  }
  return log;
}

}  // namespace shadowmark
