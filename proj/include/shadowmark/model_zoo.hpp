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

#ifndef SHADOWMARK_MODEL_ZOO_HPP_
#define SHADOWMARK_MODEL_ZOO_HPP_

#include <filesystem>

#include "shadowmark/data_forge.hpp"
#include "shadowmark/modality.hpp"
#include "shadowmark/network.hpp"

namespace shadowmark {

// Desk-scale architectures for the four roles. Shape closure holds by
// construction: G maps (key_dim,) onto M's input shape, D maps M's output
// shape onto the watermark shape, S mirrors M's input/output contract.
NetworkSpec build_network_spec(Role role, Modality modality, int key_dim);
Network build_network(Role role, Modality modality, int key_dim, uint64_t seed);

// A frozen protected model. Exposes forward behavior only; the parameter
// digest is fixed at construction and can be re-checked at any time.
class ProtectedModelHandle {
 public:
  ProtectedModelHandle(Network net, Modality modality);

  Tensor forward(const Tensor& x) const { return shadowmark::forward(net_, x); }
  ForwardTrace forward_trace(const Tensor& x) const {
    return shadowmark::forward_trace(net_, x);
  }

  // Const access for reverse passes that need input gradients; the network
  // is frozen, so no caller can accumulate parameter gradients from it.
  const Network& network() const { return net_; }
  Modality modality() const { return modality_; }
  uint64_t digest() const { return digest_; }

  // Recomputes the parameter digest and throws if the model changed.
  void check_integrity() const;

 private:
  Network net_;
  Modality modality_;
  uint64_t digest_;
};

struct PretrainResult {
  ProtectedModelHandle handle;
  double final_train_loss = 0.0;
  double holdout_error = 0.0;
};

// Per-element MSE ceiling the pretrained model must reach on held-out data.
double pretrain_error_ceiling(Modality modality);

// Fits M on a data-forge dataset (last quarter held out) and freezes it.
// Throws with the final loss figures if the ceiling is not reached.
PretrainResult pretrain_protected_model(Modality modality,
                                        const std::vector<TaskSample>& dataset,
                                        int epochs, uint64_t seed);

// Checkpoint round-trip for protected models (role "protected", frozen).
void save_protected_model(const ProtectedModelHandle& handle,
                          const std::filesystem::path& dir);
ProtectedModelHandle load_protected_model(const std::filesystem::path& dir);

}  // namespace shadowmark

#endif  // SHADOWMARK_MODEL_ZOO_HPP_
