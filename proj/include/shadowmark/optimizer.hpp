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

#ifndef SHADOWMARK_OPTIMIZER_HPP_
#define SHADOWMARK_OPTIMIZER_HPP_

#include <map>
#include <string>

#include "shadowmark/network.hpp"

namespace shadowmark {

// Adaptive-moment gradient descent. Frozen parameters are never touched.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(float lr = 2e-4f, float beta1 = 0.9f, float beta2 = 0.999f,
                         float eps = 1e-8f)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update from `grads`, which must hold an entry for every trainable
  // parameter of `net`; entries for frozen parameters are rejected.
  void step(Network& net, const GradMap& grads);

  int64_t steps_taken() const { return t_; }
  float learning_rate() const { return lr_; }
  void set_learning_rate(float lr) { lr_ = lr; }

 private:
  struct Moments {
    Tensor m, v;
  };
  float lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace shadowmark

#endif  // SHADOWMARK_OPTIMIZER_HPP_
