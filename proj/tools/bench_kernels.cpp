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

// bench_kernels: times each serial reference kernel against its OpenMP
// variant on training-sized workloads and cross-checks their outputs, so
// the parallel path can be trusted as a drop-in for the reference.
//
//   bench_kernels [reps]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "shadowmark/kernels.hpp"
#include "shadowmark/rng.hpp"

using namespace shadowmark;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<float> random_buf(size_t n, Rng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

// Worst per-element error, scaled by the reference magnitude so deep
// accumulations (dense 1024-wide) are judged fairly.
double max_rel_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(1.0, std::fabs(static_cast<double>(a[i])));
    worst = std::max(
        worst, std::fabs(static_cast<double>(a[i]) - b[i]) / scale);
  }
  return worst;
}

double time_reps(int reps, const std::function<void()>& fn) {
  fn();  // warm up (page faults, code paths)
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() /
         reps;
}

struct Row {
  std::string name;
  double serial_ms = 0.0;
  double par_ms = 0.0;
  double diff = 0.0;
};

void print_row(const Row& r) {
  std::printf("%-18s %10.3f ms %10.3f ms %8.2fx   rel err %.3g\n",
              r.name.c_str(), r.serial_ms, r.par_ms, r.serial_ms / r.par_ms,
              r.diff);
}

// Runs one kernel both ways into freshly zeroed buffers and reports the
// timing plus the worst element disagreement.
Row bench(const std::string& name, size_t out_elems, int reps,
          const std::function<void(float*)>& serial_fn,
          const std::function<void(float*)>& par_fn) {
  std::vector<float> out_s(out_elems, 0.0f), out_p(out_elems, 0.0f);
  Row row;
  row.name = name;
  row.serial_ms = time_reps(reps, [&] {
    std::fill(out_s.begin(), out_s.end(), 0.0f);
    serial_fn(out_s.data());
  });
  row.par_ms = time_reps(reps, [&] {
    std::fill(out_p.begin(), out_p.end(), 0.0f);
    par_fn(out_p.data());
  });
  row.diff = max_rel_diff(out_s, out_p);
  print_row(row);
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  if (reps <= 0) {
    std::fprintf(stderr, "usage: bench_kernels [reps > 0]\n");
    return 1;
  }

  Rng rng(99);

  // Training-shaped workloads: batch 8 of the 32x32 single-channel images the
  // desk-scale models push around, plus the decoder's dense core.
  const int n = 8, ih = 32, iw = 32;

  std::printf("%-18s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  std::vector<Row> rows;

  {  // dense 1024 -> 2048 (decoder core)
    const int in_f = 1024, out_f = 2048;
    auto in = random_buf(static_cast<size_t>(n) * in_f, rng);
    auto w = random_buf(static_cast<size_t>(out_f) * in_f, rng);
    auto b = random_buf(out_f, rng);
    rows.push_back(bench(
        "dense fwd", static_cast<size_t>(n) * out_f, reps,
        [&](float* out) {
          kernels::serial::dense_forward(in.data(), w.data(), b.data(), out, n,
                                         in_f, out_f);
        },
        [&](float* out) {
          kernels::par::dense_forward(in.data(), w.data(), b.data(), out, n,
                                      in_f, out_f);
        }));

    auto gout = random_buf(static_cast<size_t>(n) * out_f, rng);
    const size_t gin_sz = static_cast<size_t>(n) * in_f;
    const size_t gw_sz = static_cast<size_t>(out_f) * in_f;
    std::vector<float> gw(gw_sz), gb(out_f);
    rows.push_back(bench(
        "dense bwd", gin_sz, reps,
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::serial::dense_backward(in.data(), w.data(), gout.data(), gin,
                                          gw.data(), gb.data(), n, in_f, out_f);
        },
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::par::dense_backward(in.data(), w.data(), gout.data(), gin,
                                       gw.data(), gb.data(), n, in_f, out_f);
        }));
  }

  {  // conv 16 -> 16, 3x3 stride 1 (protected-model trunk)
    const int ic = 16, oc = 16, k = 3, stride = 1, pad = 1;
    const int oh = kernels::conv_out_dim(ih, k, stride, pad);
    const int ow = kernels::conv_out_dim(iw, k, stride, pad);
    auto in = random_buf(static_cast<size_t>(n) * ic * ih * iw, rng);
    auto w = random_buf(static_cast<size_t>(oc) * ic * k * k, rng);
    auto b = random_buf(oc, rng);
    const size_t out_sz = static_cast<size_t>(n) * oc * oh * ow;
    rows.push_back(bench(
        "conv2d fwd", out_sz, reps,
        [&](float* out) {
          kernels::serial::conv2d_forward(in.data(), w.data(), b.data(), out, n,
                                          ic, ih, iw, oc, k, stride, pad, oh, ow);
        },
        [&](float* out) {
          kernels::par::conv2d_forward(in.data(), w.data(), b.data(), out, n,
                                       ic, ih, iw, oc, k, stride, pad, oh, ow);
        }));

    auto gout = random_buf(out_sz, rng);
    std::vector<float> gw(w.size()), gb(oc);
    rows.push_back(bench(
        "conv2d bwd", static_cast<size_t>(n) * ic * ih * iw, reps,
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::serial::conv2d_backward(in.data(), w.data(), gout.data(),
                                           gin, gw.data(), gb.data(), n, ic, ih,
                                           iw, oc, k, stride, pad, oh, ow);
        },
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::par::conv2d_backward(in.data(), w.data(), gout.data(), gin,
                                        gw.data(), gb.data(), n, ic, ih, iw, oc,
                                        k, stride, pad, oh, ow);
        }));
  }

  {  // tconv 32 -> 16, 4x4 stride 2 (encoder/decoder upsampling)
    const int ic = 32, oc = 16, k = 4, stride = 2, pad = 1, tih = 8, tiw = 8;
    const int oh = kernels::tconv_out_dim(tih, k, stride, pad);
    const int ow = kernels::tconv_out_dim(tiw, k, stride, pad);
    auto in = random_buf(static_cast<size_t>(n) * ic * tih * tiw, rng);
    auto w = random_buf(static_cast<size_t>(ic) * oc * k * k, rng);
    auto b = random_buf(oc, rng);
    const size_t out_sz = static_cast<size_t>(n) * oc * oh * ow;
    rows.push_back(bench(
        "tconv2d fwd", out_sz, reps,
        [&](float* out) {
          kernels::serial::tconv2d_forward(in.data(), w.data(), b.data(), out,
                                           n, ic, tih, tiw, oc, k, stride, pad,
                                           oh, ow);
        },
        [&](float* out) {
          kernels::par::tconv2d_forward(in.data(), w.data(), b.data(), out, n,
                                        ic, tih, tiw, oc, k, stride, pad, oh,
                                        ow);
        }));

    auto gout = random_buf(out_sz, rng);
    std::vector<float> gw(w.size()), gb(oc);
    rows.push_back(bench(
        "tconv2d bwd", static_cast<size_t>(n) * ic * tih * tiw, reps,
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::serial::tconv2d_backward(in.data(), w.data(), gout.data(),
                                            gin, gw.data(), gb.data(), n, ic,
                                            tih, tiw, oc, k, stride, pad, oh,
                                            ow);
        },
        [&](float* gin) {
          std::fill(gw.begin(), gw.end(), 0.0f);
          std::fill(gb.begin(), gb.end(), 0.0f);
          kernels::par::tconv2d_backward(in.data(), w.data(), gout.data(), gin,
                                         gw.data(), gb.data(), n, ic, tih, tiw,
                                         oc, k, stride, pad, oh, ow);
        }));
  }

  {  // nearest upsample x2 (heatmap rendering path)
    const int c = 16, scale = 2;
    auto in = random_buf(static_cast<size_t>(n) * c * ih * iw, rng);
    const size_t out_sz =
        static_cast<size_t>(n) * c * (ih * scale) * (iw * scale);
    rows.push_back(bench(
        "upsample fwd", out_sz, reps,
        [&](float* out) {
          kernels::serial::upsample_forward(in.data(), out, n, c, ih, iw, scale);
        },
        [&](float* out) {
          kernels::par::upsample_forward(in.data(), out, n, c, ih, iw, scale);
        }));

    auto gout = random_buf(out_sz, rng);
    rows.push_back(bench(
        "upsample bwd", static_cast<size_t>(n) * c * ih * iw, reps,
        [&](float* gin) {
          kernels::serial::upsample_backward(gout.data(), gin, n, c, ih, iw,
                                             scale);
        },
        [&](float* gin) {
          kernels::par::upsample_backward(gout.data(), gin, n, c, ih, iw, scale);
        }));
  }

  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.diff);
  // Gather-style parallel variants reorder floating-point accumulation, so
  // the two paths agree to rounding, not bitwise.
  const double tol = 1e-4;
  std::printf("\nworst relative disagreement: %.3g (tolerance %.0e) %s\n",
              worst, tol, worst < tol ? "OK" : "MISMATCH");
  return worst < tol ? 0 : 1;
}
