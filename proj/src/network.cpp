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

#include "shadowmark/network.hpp"

#include <cmath>
#include <cstring>

#include "shadowmark/common.hpp"
#include "shadowmark/kernels.hpp"
#include "shadowmark/rng.hpp"

namespace shadowmark {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kTConv2d: return "transpose-conv2d";
    case LayerKind::kUpsampleNearest: return "upsample-nearest";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kLeakyRelu: return "leaky-relu";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kBatchReshape: return "batch-reshape";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  for (LayerKind k : {LayerKind::kDense, LayerKind::kConv2d, LayerKind::kTConv2d,
                      LayerKind::kUpsampleNearest, LayerKind::kRelu, LayerKind::kLeakyRelu,
                      LayerKind::kTanh, LayerKind::kSigmoid, LayerKind::kBatchReshape})
    if (name == layer_kind_name(k)) return k;
  throw Error("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::dense(int in_f, int out_f) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.in_features = in_f;
  l.out_features = out_f;
  return l;
}
LayerSpec LayerSpec::conv2d(int ic, int oc, int k, int stride, int pad) {
  LayerSpec l;
  l.kind = LayerKind::kConv2d;
  l.in_channels = ic;
  l.out_channels = oc;
  l.kernel = k;
  l.stride = stride;
  l.pad = pad;
  return l;
}
LayerSpec LayerSpec::tconv2d(int ic, int oc, int k, int stride, int pad) {
  LayerSpec l = conv2d(ic, oc, k, stride, pad);
  l.kind = LayerKind::kTConv2d;
  return l;
}
LayerSpec LayerSpec::upsample(int scale) {
  LayerSpec l;
  l.kind = LayerKind::kUpsampleNearest;
  l.scale = scale;
  return l;
}
LayerSpec LayerSpec::relu() {
  LayerSpec l;
  l.kind = LayerKind::kRelu;
  return l;
}
LayerSpec LayerSpec::leaky_relu(float slope) {
  LayerSpec l;
  l.kind = LayerKind::kLeakyRelu;
  l.slope = slope;
  return l;
}
LayerSpec LayerSpec::tanh_act(bool rescale01) {
  LayerSpec l;
  l.kind = LayerKind::kTanh;
  l.rescale01 = rescale01;
  return l;
}
LayerSpec LayerSpec::sigmoid() {
  LayerSpec l;
  l.kind = LayerKind::kSigmoid;
  return l;
}
LayerSpec LayerSpec::reshape(Shape target) {
  LayerSpec l;
  l.kind = LayerKind::kBatchReshape;
  l.target = std::move(target);
  return l;
}

Shape layer_output_shape(const LayerSpec& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::kDense:
      if (in.size() != 1 || in[0] != layer.in_features)
        throw Error(std::string("dense expects (") + std::to_string(layer.in_features) +
                    "), got " + shape_str(in));
      return {layer.out_features};
    case LayerKind::kConv2d: {
      if (in.size() != 3 || in[0] != layer.in_channels)
        throw Error("conv2d expects (C,H,W) with C=" + std::to_string(layer.in_channels) +
                    ", got " + shape_str(in));
      int oh = kernels::conv_out_dim(in[1], layer.kernel, layer.stride, layer.pad);
      int ow = kernels::conv_out_dim(in[2], layer.kernel, layer.stride, layer.pad);
      if (oh <= 0 || ow <= 0)
        throw Error("conv2d collapses " + shape_str(in) + " to an empty output");
      return {layer.out_channels, oh, ow};
    }
    case LayerKind::kTConv2d: {
      if (in.size() != 3 || in[0] != layer.in_channels)
        throw Error("transpose-conv2d expects (C,H,W) with C=" +
                    std::to_string(layer.in_channels) + ", got " + shape_str(in));
      int oh = kernels::tconv_out_dim(in[1], layer.kernel, layer.stride, layer.pad);
      int ow = kernels::tconv_out_dim(in[2], layer.kernel, layer.stride, layer.pad);
      if (oh <= 0 || ow <= 0)
        throw Error("transpose-conv2d collapses " + shape_str(in) + " to an empty output");
      return {layer.out_channels, oh, ow};
    }
    case LayerKind::kUpsampleNearest:
      if (in.size() != 3) throw Error("upsample-nearest expects (C,H,W), got " + shape_str(in));
      return {in[0], in[1] * layer.scale, in[2] * layer.scale};
    case LayerKind::kBatchReshape:
      if (shape_numel(layer.target) != shape_numel(in))
        throw Error("batch-reshape " + shape_str(in) + " -> " + shape_str(layer.target) +
                    " changes element count");
      return layer.target;
    default:
      return in;  // elementwise
  }
}

NetworkSpec make_spec(std::vector<LayerSpec> layers, Shape input_shape) {
  NetworkSpec spec;
  spec.layers = std::move(layers);
  spec.input_shape = std::move(input_shape);
  Shape cur = spec.input_shape;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    try {
      cur = layer_output_shape(spec.layers[i], cur);
    } catch (const Error& e) {
      throw Error("layer " + std::to_string(i) + ": " + e.what());
    }
  }
  spec.output_shape = cur;
  return spec;
}

namespace {

std::vector<Parameter> init_params(const NetworkSpec& spec, uint64_t seed) {
  std::vector<Parameter> params;
  Rng rng = Rng(seed).derive("init");
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (!l.has_params()) continue;
    const std::string prefix = "l" + std::to_string(i) + ".";
    Tensor w, b;
    double std_dev = 0.0;
    if (l.kind == LayerKind::kDense) {
      w = Tensor({l.out_features, l.in_features});
      b = Tensor({l.out_features});
      std_dev = 1.0 / std::sqrt(static_cast<double>(l.in_features));
    } else if (l.kind == LayerKind::kConv2d) {
      w = Tensor({l.out_channels, l.in_channels, l.kernel, l.kernel});
      b = Tensor({l.out_channels});
      std_dev = 1.0 / std::sqrt(static_cast<double>(l.in_channels) * l.kernel * l.kernel);
    } else {
      w = Tensor({l.in_channels, l.out_channels, l.kernel, l.kernel});
      b = Tensor({l.out_channels});
      // Each output element of a transpose conv sees roughly (k/stride)^2 taps.
      double fan = static_cast<double>(l.in_channels) *
                   std::max(1, l.kernel / l.stride) * std::max(1, l.kernel / l.stride);
      std_dev = 1.0 / std::sqrt(fan);
    }
    for (auto& v : w.data) v = static_cast<float>(rng.normal() * std_dev);
    params.push_back({std::move(w), true, prefix + "weight"});
    params.push_back({std::move(b), true, prefix + "bias"});
  }
  return params;
}

// Expected parameter list (name, shape) for a spec, used to validate
// externally supplied parameters.
void check_params(const NetworkSpec& spec, const std::vector<Parameter>& params) {
  std::vector<Parameter> expect = init_params(spec, 0);
  if (expect.size() != params.size())
    throw Error("network expects " + std::to_string(expect.size()) + " parameters, got " +
                std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != expect[i].name)
      throw Error("parameter " + std::to_string(i) + ": expected name '" + expect[i].name +
                  "', got '" + params[i].name + "'");
    if (params[i].tensor.shape != expect[i].tensor.shape)
      throw Error("parameter '" + params[i].name + "': expected shape " +
                  shape_str(expect[i].tensor.shape) + ", got " +
                  shape_str(params[i].tensor.shape));
  }
}

}  // namespace

Network::Network(NetworkSpec spec, uint64_t init_seed)
    : spec_(std::move(spec)), params_(init_params(spec_, init_seed)), seed_(init_seed) {}

Network::Network(NetworkSpec spec, std::vector<Parameter> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  check_params(spec_, params_);
}

void Network::freeze() {
  for (auto& p : params_) p.trainable = false;
}

bool Network::frozen() const {
  for (const auto& p : params_)
    if (p.trainable) return false;
  return true;
}

uint64_t Network::params_digest() const {
  uint64_t h = 14695981039346656037ULL;
  for (const auto& p : params_)
    h = fnv1a64(p.tensor.data.data(), p.tensor.data.size() * sizeof(float), h);
  return h;
}

namespace {

struct LayerParams {
  const Tensor* w = nullptr;
  const Tensor* b = nullptr;
  bool trainable = false;
  std::string wname, bname;
};

// Parameters per layer index, in the order init_params emits them.
std::vector<LayerParams> collect_params(const Network& net) {
  std::vector<LayerParams> out(net.spec().layers.size());
  size_t pi = 0;
  const auto& params = net.params();
  for (size_t i = 0; i < net.spec().layers.size(); ++i) {
    if (!net.spec().layers[i].has_params()) continue;
    out[i].w = &params[pi].tensor;
    out[i].wname = params[pi].name;
    out[i].trainable = params[pi].trainable;
    ++pi;
    out[i].b = &params[pi].tensor;
    out[i].bname = params[pi].name;
    ++pi;
  }
  return out;
}

Shape batched(int n, const Shape& per_sample) {
  Shape s;
  s.reserve(per_sample.size() + 1);
  s.push_back(n);
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

// Accepts per-sample or batch-leading input; returns (batch, had_batch_dim).
std::pair<int, bool> canonical_batch(const NetworkSpec& spec, const Tensor& input) {
  if (input.shape == spec.input_shape) return {1, false};
  if (input.shape.size() == spec.input_shape.size() + 1 && input.shape[0] >= 1) {
    Shape tail(input.shape.begin() + 1, input.shape.end());
    if (tail == spec.input_shape) return {input.shape[0], true};
  }
  throw Error("forward: expected shape " + shape_str(spec.input_shape) +
              " (a leading batch axis is allowed), got " + shape_str(input.shape));
}

Tensor run_layer(const LayerSpec& l, const LayerParams& lp, const Tensor& in, int n,
                 const Shape& in_shape, const Shape& out_shape) {
  Tensor out(batched(n, out_shape));
  switch (l.kind) {
    case LayerKind::kDense:
      kernels::dense_forward(in.data.data(), lp.w->data.data(), lp.b->data.data(),
                             out.data.data(), n, l.in_features, l.out_features);
      break;
    case LayerKind::kConv2d:
      kernels::conv2d_forward(in.data.data(), lp.w->data.data(), lp.b->data.data(),
                              out.data.data(), n, l.in_channels, in_shape[1], in_shape[2],
                              l.out_channels, l.kernel, l.stride, l.pad, out_shape[1],
                              out_shape[2]);
      break;
    case LayerKind::kTConv2d:
      kernels::tconv2d_forward(in.data.data(), lp.w->data.data(), lp.b->data.data(),
                               out.data.data(), n, l.in_channels, in_shape[1], in_shape[2],
                               l.out_channels, l.kernel, l.stride, l.pad, out_shape[1],
                               out_shape[2]);
      break;
    case LayerKind::kUpsampleNearest:
      kernels::upsample_forward(in.data.data(), out.data.data(), n, in_shape[0],
                                in_shape[1], in_shape[2], l.scale);
      break;
    case LayerKind::kRelu:
      for (int64_t i = 0; i < in.numel(); ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
      break;
    case LayerKind::kLeakyRelu:
      for (int64_t i = 0; i < in.numel(); ++i)
        out[i] = in[i] > 0.0f ? in[i] : l.slope * in[i];
      break;
    case LayerKind::kTanh:
      if (l.rescale01)
        for (int64_t i = 0; i < in.numel(); ++i)
          out[i] = 0.5f * (std::tanh(in[i]) + 1.0f);
      else
        for (int64_t i = 0; i < in.numel(); ++i) out[i] = std::tanh(in[i]);
      break;
    case LayerKind::kSigmoid:
      for (int64_t i = 0; i < in.numel(); ++i) out[i] = 1.0f / (1.0f + std::exp(-in[i]));
      break;
    case LayerKind::kBatchReshape:
      out.data = in.data;
      break;
  }
  return out;
}

}  // namespace

ForwardTrace forward_trace(const Network& net, const Tensor& input) {
  const NetworkSpec& spec = net.spec();
  auto [n, had_batch] = canonical_batch(spec, input);
  require_finite(input, "forward input");

  ForwardTrace trace;
  trace.batch = n;
  trace.had_batch_dim = had_batch;
  trace.acts.reserve(spec.layers.size() + 1);
  trace.acts.push_back(had_batch ? input : input.reshaped(batched(1, spec.input_shape)));

  auto lps = collect_params(net);
  Shape cur = spec.input_shape;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    Shape next = layer_output_shape(spec.layers[i], cur);
    Tensor out = run_layer(spec.layers[i], lps[i], trace.acts.back(), n, cur, next);
    if (!out.all_finite())
      throw Error("forward: non-finite activation at layer " + std::to_string(i) + " (" +
                  layer_kind_name(spec.layers[i].kind) + ")");
    trace.acts.push_back(std::move(out));
    cur = next;
  }
  return trace;
}

Tensor forward(const Network& net, const Tensor& input) {
  ForwardTrace trace = forward_trace(net, input);
  Tensor out = trace.output();
  if (!trace.had_batch_dim) return out.reshaped(net.spec().output_shape);
  return out;
}

Tensor backward(const Network& net, const ForwardTrace& trace, const Tensor& grad_output,
                GradMap* grads) {
  const NetworkSpec& spec = net.spec();
  const int n = trace.batch;
  if (trace.acts.size() != spec.layers.size() + 1)
    throw Error("backward: trace does not match network");
  require_shape(grad_output, trace.output().shape, "backward grad_output");

  auto lps = collect_params(net);

  // Per-sample shapes along the stack.
  std::vector<Shape> shapes;
  shapes.push_back(spec.input_shape);
  for (const auto& l : spec.layers)
    shapes.push_back(layer_output_shape(l, shapes.back()));

  auto grad_for = [&](const std::string& name, const Shape& shape) -> Tensor* {
    if (!grads) return nullptr;
    auto it = grads->find(name);
    if (it == grads->end()) it = grads->emplace(name, Tensor(shape)).first;
    return &it->second;
  };

  Tensor g = grad_output;
  for (int li = static_cast<int>(spec.layers.size()) - 1; li >= 0; --li) {
    const LayerSpec& l = spec.layers[li];
    const Tensor& in = trace.acts[li];
    const Tensor& out = trace.acts[li + 1];
    const Shape& ishape = shapes[li];
    const Shape& oshape = shapes[li + 1];
    Tensor gin(batched(n, ishape));
    const bool want_param_grads = grads && lps[li].trainable;
    switch (l.kind) {
      case LayerKind::kDense: {
        Tensor* gw = want_param_grads ? grad_for(lps[li].wname, lps[li].w->shape) : nullptr;
        Tensor* gb = want_param_grads ? grad_for(lps[li].bname, lps[li].b->shape) : nullptr;
        kernels::dense_backward(in.data.data(), lps[li].w->data.data(), g.data.data(),
                                gin.data.data(), gw ? gw->data.data() : nullptr,
                                gb ? gb->data.data() : nullptr, n, l.in_features,
                                l.out_features);
        break;
      }
      case LayerKind::kConv2d: {
        Tensor* gw = want_param_grads ? grad_for(lps[li].wname, lps[li].w->shape) : nullptr;
        Tensor* gb = want_param_grads ? grad_for(lps[li].bname, lps[li].b->shape) : nullptr;
        kernels::conv2d_backward(in.data.data(), lps[li].w->data.data(), g.data.data(),
                                 gin.data.data(), gw ? gw->data.data() : nullptr,
                                 gb ? gb->data.data() : nullptr, n, l.in_channels,
                                 ishape[1], ishape[2], l.out_channels, l.kernel, l.stride,
                                 l.pad, oshape[1], oshape[2]);
        break;
      }
      case LayerKind::kTConv2d: {
        Tensor* gw = want_param_grads ? grad_for(lps[li].wname, lps[li].w->shape) : nullptr;
        Tensor* gb = want_param_grads ? grad_for(lps[li].bname, lps[li].b->shape) : nullptr;
        kernels::tconv2d_backward(in.data.data(), lps[li].w->data.data(), g.data.data(),
                                  gin.data.data(), gw ? gw->data.data() : nullptr,
                                  gb ? gb->data.data() : nullptr, n, l.in_channels,
                                  ishape[1], ishape[2], l.out_channels, l.kernel, l.stride,
                                  l.pad, oshape[1], oshape[2]);
        break;
      }
      case LayerKind::kUpsampleNearest:
        kernels::upsample_backward(g.data.data(), gin.data.data(), n, ishape[0], ishape[1],
                                   ishape[2], l.scale);
        break;
      case LayerKind::kRelu:
        for (int64_t i = 0; i < g.numel(); ++i) gin[i] = in[i] > 0.0f ? g[i] : 0.0f;
        break;
      case LayerKind::kLeakyRelu:
        for (int64_t i = 0; i < g.numel(); ++i)
          gin[i] = in[i] > 0.0f ? g[i] : l.slope * g[i];
        break;
      case LayerKind::kTanh:
        if (l.rescale01)
          for (int64_t i = 0; i < g.numel(); ++i) {
            const float t = 2.0f * out[i] - 1.0f;
            gin[i] = g[i] * 0.5f * (1.0f - t * t);
          }
        else
          for (int64_t i = 0; i < g.numel(); ++i) gin[i] = g[i] * (1.0f - out[i] * out[i]);
        break;
      case LayerKind::kSigmoid:
        for (int64_t i = 0; i < g.numel(); ++i) gin[i] = g[i] * out[i] * (1.0f - out[i]);
        break;
      case LayerKind::kBatchReshape:
        gin.data = g.data;
        break;
    }
    g = std::move(gin);
  }
  return g;
}

GradMap compute_gradients(const Network& net, const LossFn& loss_fn, const Tensor& input) {
  ForwardTrace trace = forward_trace(net, input);
  LossGrad lg = loss_fn(trace.output());
  if (!std::isfinite(lg.value)) throw Error("compute_gradients: non-finite loss");
  require_shape(lg.grad, trace.output().shape, "loss gradient");

  GradMap grads;
  // Seed entries so every trainable parameter reports a gradient.
  for (const auto& p : net.params())
    if (p.trainable) grads.emplace(p.name, Tensor(p.tensor.shape));
  backward(net, trace, lg.grad, &grads);
  return grads;
}

}  // namespace shadowmark
