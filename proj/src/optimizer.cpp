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

#include "shadowmark/optimizer.hpp"

#include <cmath>

#include "shadowmark/common.hpp"

namespace shadowmark {

void AdamOptimizer::step(Network& net, const GradMap& grads) {
  for (const auto& [name, g] : grads) {
    bool found = false;
    for (const auto& p : net.params())
      if (p.name == name) {
        if (!p.trainable)
          throw Error("apply_update: gradient supplied for frozen parameter '" + name + "'");
        found = true;
        break;
      }
    if (!found) throw Error("apply_update: unknown parameter '" + name + "'");
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), static_cast<double>(t_));

  for (auto& p : net.mutable_params()) {
    if (!p.trainable) continue;
    auto git = grads.find(p.name);
    if (git == grads.end())
      throw Error("apply_update: missing gradient for trainable parameter '" + p.name + "'");
    const Tensor& g = git->second;
    require_shape(g, p.tensor.shape, "gradient for '" + p.name + "'");

    auto sit = state_.find(p.name);
    if (sit == state_.end())
      sit = state_.emplace(p.name, Moments{Tensor(p.tensor.shape), Tensor(p.tensor.shape)})
                .first;
    Tensor& m = sit->second.m;
    Tensor& v = sit->second.v;
    for (int64_t i = 0; i < p.tensor.numel(); ++i) {
      m[i] = beta1_ * m[i] + (1.0f - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0f - beta2_) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p.tensor[i] -= static_cast<float>(lr_ * mh / (std::sqrt(vh) + eps_));
    }
  }
}

}  // namespace shadowmark
