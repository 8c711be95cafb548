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

// Test-only oracles, independent of the library's compute paths: central
// finite differences for gradients, a direct-formula correlation, and a naive
// DFT for spectral checks.

#ifndef SHADOWMARK_TESTS_ORACLES_HPP_
#define SHADOWMARK_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "shadowmark/network.hpp"
#include "shadowmark/rng.hpp"
#include "shadowmark/tensor.hpp"

namespace shadowmark::testing {

// Weighted sum of squares against a random target; value in double, analytic
// gradient for the library side of the check.
struct WeightedSseLoss {
  Tensor weights, targets;

  static WeightedSseLoss random(const Shape& out_shape, Rng& rng) {
    WeightedSseLoss l{Tensor(out_shape), Tensor(out_shape)};
    for (auto& w : l.weights.data) w = static_cast<float>(rng.uniform(0.5, 1.5));
    for (auto& t : l.targets.data) t = static_cast<float>(rng.normal() * 0.5);
    return l;
  }

  double value(const Tensor& out) const {
    double s = 0.0;
    for (int64_t i = 0; i < out.numel(); ++i) {
      const double d = static_cast<double>(out[i]) - targets[i];
      s += weights[i] * d * d;
    }
    return s / static_cast<double>(out.numel());
  }

  Tensor grad(const Tensor& out) const {
    Tensor g(out.shape);
    const double n = static_cast<double>(out.numel());
    for (int64_t i = 0; i < out.numel(); ++i)
      g[i] = static_cast<float>(2.0 * weights[i] *
                                (static_cast<double>(out[i]) - targets[i]) / n);
    return g;
  }

  LossFn as_loss_fn() const {
    return [this](const Tensor& out) { return LossGrad{value(out), grad(out)}; };
  }
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  int checked = 0;
};

inline double rel_err(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-2});
  return std::fabs(a - b) / denom;
}

// Central finite differences (step h) over every trainable parameter entry
// and every input entry, compared against the analytic reverse pass.
inline GradCheckResult finite_difference_check(Network& net, const WeightedSseLoss& loss,
                                               const Tensor& input, double h = 1e-3) {
  GradCheckResult res;

  GradMap analytic = compute_gradients(net, loss.as_loss_fn(), input);

  for (auto& p : net.mutable_params()) {
    if (!p.trainable) continue;
    const Tensor& ag = analytic.at(p.name);
    for (int64_t i = 0; i < p.tensor.numel(); ++i) {
      const float orig = p.tensor[i];
      p.tensor[i] = static_cast<float>(orig + h);
      const double lp = loss.value(forward(net, input));
      p.tensor[i] = static_cast<float>(orig - h);
      const double lm = loss.value(forward(net, input));
      p.tensor[i] = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      res.max_rel_err = std::max(res.max_rel_err, rel_err(ag[i], numeric));
      ++res.checked;
    }
  }

  // Input gradient via the reverse pass.
  ForwardTrace trace = forward_trace(net, input);
  Tensor gin = backward(net, trace, loss.grad(trace.output()), nullptr);
  Tensor in = input;
  for (int64_t i = 0; i < in.numel(); ++i) {
    const float orig = in[i];
    in[i] = static_cast<float>(orig + h);
    const double lp = loss.value(forward(net, in));
    in[i] = static_cast<float>(orig - h);
    const double lm = loss.value(forward(net, in));
    in[i] = orig;
    const double numeric = (lp - lm) / (2.0 * h);
    res.max_rel_err = std::max(res.max_rel_err, rel_err(gin[i], numeric));
    ++res.checked;
  }
  return res;
}

// Direct-formula cosine correlation in double precision.
inline double ncc_oracle(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Naive 2D DFT magnitude spectrum of an H x W image (row-major).
inline std::vector<double> dft2_magnitude(const std::vector<float>& img, int h, int w) {
  std::vector<double> mag(static_cast<size_t>(h) * w, 0.0);
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int fy = 0; fy < h; ++fy)
    for (int fx = 0; fx < w; ++fx) {
      std::complex<double> acc(0.0, 0.0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double phase = -two_pi * (static_cast<double>(fy) * y / h +
                                          static_cast<double>(fx) * x / w);
          acc += static_cast<double>(img[static_cast<size_t>(y) * w + x]) *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      mag[static_cast<size_t>(fy) * w + fx] = std::abs(acc);
    }
  return mag;
}

// One-sample Kolmogorov–Smirnov p-value (asymptotic) of `samples` against a
// caller-provided CDF.
inline double ks_p_value(std::vector<double> samples,
                         const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max(d, std::fabs(c - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - c));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Random normal tensor helper for tests.
inline Tensor random_normal(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor t(shape);
  for (auto& v : t.data) v = static_cast<float>(rng.normal() * scale);
  return t;
}

// Inputs for activation layers are nudged away from the ReLU kink so the
// finite-difference stencil never straddles it.
inline Tensor random_kink_free(const Shape& shape, Rng& rng) {
  Tensor t = random_normal(shape, rng);
  for (auto& v : t.data)
    if (std::fabs(v) < 0.05f) v += (v >= 0.0f ? 0.1f : -0.1f);
  return t;
}

}  // namespace shadowmark::testing

#endif  // SHADOWMARK_TESTS_ORACLES_HPP_
