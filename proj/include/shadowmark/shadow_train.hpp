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

#ifndef SHADOWMARK_SHADOW_TRAIN_HPP_
#define SHADOWMARK_SHADOW_TRAIN_HPP_

#include <filesystem>
#include <vector>

#include "shadowmark/keysmith.hpp"
#include "shadowmark/model_zoo.hpp"
#include "shadowmark/verdict.hpp"

namespace shadowmark {

// Training configuration for the Encode procedure. The three losses are
// summed unweighted; they share one scale because all of them are built on
// per-element mean squares.
struct TrainConfig {
  int epochs_max = 200;
  int steps_per_epoch = 8;
  int normal_batch = 8;        // normal queries per step (the refine path)
  int wrong_keys_per_step = 1; // fresh wrong keys per step
  double epsilon = 1e-4;       // floor constant of the reciprocal losses
  double lr = 5e-4;
  double ncc_hi = 0.955;        // early stop: correct-key NCC at or above this...
  double ncc_lo = 0.45;        // ...while mean wrong-key NCC is at or below this
  int eval_wrong_keys = 16;    // wrong keys per epoch evaluation
  uint64_t seed = 1;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double l_k = 0.0, l_wrongk = 0.0, l_x = 0.0;
  double ncc_correct = 0.0, ncc_wrong_mean = 0.0;
};

// Result of Encode: the tuned key encoder and decoder, the untouched
// protected model, provenance digests, and the full per-epoch log.
struct TrainedPipeline {
  Network g, d;
  ProtectedModelHandle m;
  Modality modality = Modality::kI2I;
  uint64_t mark_digest = 0, key_digest = 0;
  std::vector<EpochLog> log;
  bool converged = false;
};

// The three losses, value-only entry points (the training loop fuses their
// gradients internally). All distances are per-element mean squares.
double loss_correct_key(const Network& g, const Network& d, const ProtectedModelHandle& m,
                        const Key& k, const Tensor& mark);
double loss_wrong_key(const Network& g, const Network& d, const ProtectedModelHandle& m,
                      const Key& wrong, const Tensor& mark, double epsilon);
double loss_refine(const Network& d, const ProtectedModelHandle& m, const Tensor& x,
                   const Tensor& mark, double epsilon);

// Jointly fits G and D around the frozen M so that `mark` is extractable
// with `key` and only with it. Divergence (non-finite loss) aborts with an
// error; missing the early-stop criteria returns converged=false.
TrainedPipeline encode(Network g, Network d, ProtectedModelHandle m, const Key& key,
                       const Tensor& mark, const TrainConfig& config);

// CSV log: "epoch, L_k, L_wrongk, L_x, ncc_correct, ncc_wrong_mean".
void write_training_log(const std::vector<EpochLog>& log,
                        const std::filesystem::path& path);
std::vector<EpochLog> read_training_log(const std::filesystem::path& path);

// Pipeline directory: g/, d/, m/ checkpoints + pipeline.json + log.csv.
void save_pipeline(const TrainedPipeline& pipeline, const std::filesystem::path& dir);
TrainedPipeline load_pipeline(const std::filesystem::path& dir);

}  // namespace shadowmark

#endif  // SHADOWMARK_SHADOW_TRAIN_HPP_
