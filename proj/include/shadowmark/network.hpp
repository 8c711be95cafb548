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

#ifndef SHADOWMARK_NETWORK_HPP_
#define SHADOWMARK_NETWORK_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "shadowmark/tensor.hpp"

namespace shadowmark {

enum class LayerKind {
  kDense,
  kConv2d,
  kTConv2d,
  kUpsampleNearest,
  kRelu,
  kLeakyRelu,
  kTanh,
  kSigmoid,
  kBatchReshape,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int in_features = 0, out_features = 0;  // dense
  int in_channels = 0, out_channels = 0;  // conv2d / transpose-conv2d
  int kernel = 0, stride = 1, pad = 0;
  int scale = 2;           // upsample-nearest
  float slope = 0.01f;     // leaky-relu
  bool rescale01 = false;  // tanh remapped to (0,1)
  Shape target;            // batch-reshape, per-sample

  static LayerSpec dense(int in_f, int out_f);
  static LayerSpec conv2d(int ic, int oc, int k, int stride = 1, int pad = 0);
  static LayerSpec tconv2d(int ic, int oc, int k, int stride = 1, int pad = 0);
  static LayerSpec upsample(int scale);
  static LayerSpec relu();
  static LayerSpec leaky_relu(float slope = 0.01f);
  static LayerSpec tanh_act(bool rescale01 = false);
  static LayerSpec sigmoid();
  static LayerSpec reshape(Shape target);

  bool has_params() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2d ||
           kind == LayerKind::kTConv2d;
  }
};

// Per-sample output shape of a layer; throws Error when the layer cannot
// consume `in`.
Shape layer_output_shape(const LayerSpec& layer, const Shape& in);

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  Shape input_shape;   // per-sample, no batch axis
  Shape output_shape;  // derived by make_spec
};

// Validates that adjacent layers compose and fills in output_shape.
NetworkSpec make_spec(std::vector<LayerSpec> layers, Shape input_shape);

struct Parameter {
  Tensor tensor;
  bool trainable = true;
  std::string name;
};

class Network {
 public:
  Network(NetworkSpec spec, uint64_t init_seed);
  Network(NetworkSpec spec, std::vector<Parameter> params);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Parameter>& params() const { return params_; }
  std::vector<Parameter>& mutable_params() { return params_; }
  uint64_t init_seed() const { return seed_; }

  void freeze();
  bool frozen() const;

  // FNV-1a over the parameter blobs in declaration order.
  uint64_t params_digest() const;

 private:
  NetworkSpec spec_;
  std::vector<Parameter> params_;
  uint64_t seed_ = 0;
};

// Gradients keyed by parameter name. std::map keeps iteration deterministic.
using GradMap = std::map<std::string, Tensor>;

// Activations of one forward pass in canonical batched form;
// acts[0] is the input, acts[i+1] the output of layer i.
struct ForwardTrace {
  bool had_batch_dim = false;
  int batch = 1;
  std::vector<Tensor> acts;
  const Tensor& output() const { return acts.back(); }
};

// Accepts a per-sample input or one with a leading batch axis; the result
// matches the input's batching. Parameters are never mutated.
Tensor forward(const Network& net, const Tensor& input);

ForwardTrace forward_trace(const Network& net, const Tensor& input);

// Reverse pass over a recorded trace. `grad_output` must match the trace
// output shape. Parameter gradients accumulate into `grads` for trainable
// parameters only; pass nullptr to propagate through a frozen network.
// Returns the gradient with respect to the trace input.
Tensor backward(const Network& net, const ForwardTrace& trace, const Tensor& grad_output,
                GradMap* grads);

struct LossGrad {
  double value = 0.0;
  Tensor grad;  // dL/d(output), same shape as the network output
};
using LossFn = std::function<LossGrad(const Tensor& output)>;

// One entry per trainable parameter (zero tensor when the loss does not reach
// it); frozen parameters get no entry. Rejects non-finite losses.
GradMap compute_gradients(const Network& net, const LossFn& loss_fn, const Tensor& input);

}  // namespace shadowmark

#endif  // SHADOWMARK_NETWORK_HPP_
