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

#ifndef SHADOWMARK_KERNELS_HPP_
#define SHADOWMARK_KERNELS_HPP_

// Compute kernels behind the network layers. Each kernel exists twice:
//   serial::  — straightforward reference loops, kept for testing
//   par::     — OpenMP variants, parallel over independent output elements
//               with a fixed inner accumulation order, so results are
//               bit-stable across repeated calls and thread counts
// The unqualified functions dispatch on the process-wide mode (parallel by
// default, SHADOWMARK_SERIAL=1 selects serial).
//
// Contract shared by all kernels: every output buffer (out, gin, gw, gb) is
// zero-initialized by the caller and accumulated into (+=), which lets a
// layer's gradients accumulate over several loss paths. Null gin/gw/gb skips
// that gradient.

namespace shadowmark::kernels {

enum class Mode { kSerial, kParallel };

Mode mode();
void set_mode(Mode m);

#define SHADOWMARK_DECLARE_KERNELS                                                       \
  void dense_forward(const float* in, const float* w, const float* b, float* out,        \
                     int n, int in_f, int out_f);                                        \
  void dense_backward(const float* in, const float* w, const float* gout, float* gin,    \
                      float* gw, float* gb, int n, int in_f, int out_f);                 \
  void conv2d_forward(const float* in, const float* w, const float* b, float* out,       \
                      int n, int ic, int ih, int iw, int oc, int k, int stride, int pad, \
                      int oh, int ow);                                                   \
  void conv2d_backward(const float* in, const float* w, const float* gout, float* gin,   \
                       float* gw, float* gb, int n, int ic, int ih, int iw, int oc,      \
                       int k, int stride, int pad, int oh, int ow);                      \
  void tconv2d_forward(const float* in, const float* w, const float* b, float* out,      \
                       int n, int ic, int ih, int iw, int oc, int k, int stride,         \
                       int pad, int oh, int ow);                                         \
  void tconv2d_backward(const float* in, const float* w, const float* gout, float* gin,  \
                        float* gw, float* gb, int n, int ic, int ih, int iw, int oc,     \
                        int k, int stride, int pad, int oh, int ow);                     \
  void upsample_forward(const float* in, float* out, int n, int c, int ih, int iw,       \
                        int scale);                                                      \
  void upsample_backward(const float* gout, float* gin, int n, int c, int ih, int iw,    \
                         int scale);

namespace serial {
SHADOWMARK_DECLARE_KERNELS
}
namespace par {
SHADOWMARK_DECLARE_KERNELS
}
SHADOWMARK_DECLARE_KERNELS

#undef SHADOWMARK_DECLARE_KERNELS

// Transpose-conv output edge: oh = (ih - 1) * stride - 2 * pad + k.
int tconv_out_dim(int in_dim, int k, int stride, int pad);
// Conv output edge: oh = (ih + 2 * pad - k) / stride + 1.
int conv_out_dim(int in_dim, int k, int stride, int pad);

}  // namespace shadowmark::kernels

#endif  // SHADOWMARK_KERNELS_HPP_
