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

#include "shadowmark/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace shadowmark::kernels {

namespace {

Mode initial_mode() {
  const char* env = std::getenv("SHADOWMARK_SERIAL");
  if (env && env[0] == '1') return Mode::kSerial;
  return Mode::kParallel;
}

std::atomic<Mode> g_mode{initial_mode()};

}  // namespace

Mode mode() { return g_mode.load(std::memory_order_relaxed); }
void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }

int conv_out_dim(int in_dim, int k, int stride, int pad) {
  return (in_dim + 2 * pad - k) / stride + 1;
}

int tconv_out_dim(int in_dim, int k, int stride, int pad) {
  return (in_dim - 1) * stride - 2 * pad + k;
}

// ---------------------------------------------------------------------------
// Serial reference kernels. Plain loops in the most direct form; the scatter
// formulations mirror the textbook definitions.
// ---------------------------------------------------------------------------

namespace serial {

void dense_forward(const float* in, const float* w, const float* b, float* out,
                   int n, int in_f, int out_f) {
  for (int s = 0; s < n; ++s) {
    const float* x = in + static_cast<long>(s) * in_f;
    float* y = out + static_cast<long>(s) * out_f;
    for (int o = 0; o < out_f; ++o) {
      float acc = b[o];
      const float* wr = w + static_cast<long>(o) * in_f;
      for (int i = 0; i < in_f; ++i) acc += wr[i] * x[i];
      y[o] += acc;
    }
  }
}

void dense_backward(const float* in, const float* w, const float* gout, float* gin,
                    float* gw, float* gb, int n, int in_f, int out_f) {
  for (int s = 0; s < n; ++s) {
    const float* x = in + static_cast<long>(s) * in_f;
    const float* go = gout + static_cast<long>(s) * out_f;
    float* gx = gin ? gin + static_cast<long>(s) * in_f : nullptr;
    for (int o = 0; o < out_f; ++o) {
      const float g = go[o];
      const float* wr = w + static_cast<long>(o) * in_f;
      float* gwr = gw ? gw + static_cast<long>(o) * in_f : nullptr;
      if (gb) gb[o] += g;
      for (int i = 0; i < in_f; ++i) {
        if (gwr) gwr[i] += g * x[i];
        if (gx) gx[i] += g * wr[i];
      }
    }
  }
}

void conv2d_forward(const float* in, const float* w, const float* b, float* out,
                    int n, int ic, int ih, int iw, int oc, int k, int stride, int pad,
                    int oh, int ow) {
  for (int s = 0; s < n; ++s)
    for (int co = 0; co < oc; ++co)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          float acc = b[co];
          for (int ci = 0; ci < ic; ++ci)
            for (int ky = 0; ky < k; ++ky) {
              int sy = y * stride - pad + ky;
              if (sy < 0 || sy >= ih) continue;
              for (int kx = 0; kx < k; ++kx) {
                int sx = x * stride - pad + kx;
                if (sx < 0 || sx >= iw) continue;
                acc += in[((static_cast<long>(s) * ic + ci) * ih + sy) * iw + sx] *
                       w[((static_cast<long>(co) * ic + ci) * k + ky) * k + kx];
              }
            }
          out[((static_cast<long>(s) * oc + co) * oh + y) * ow + x] += acc;
        }
}

void conv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                     float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                     int k, int stride, int pad, int oh, int ow) {
  for (int s = 0; s < n; ++s)
    for (int co = 0; co < oc; ++co)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          const float g = gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x];
          if (gb) gb[co] += g;
          for (int ci = 0; ci < ic; ++ci)
            for (int ky = 0; ky < k; ++ky) {
              int sy = y * stride - pad + ky;
              if (sy < 0 || sy >= ih) continue;
              for (int kx = 0; kx < k; ++kx) {
                int sx = x * stride - pad + kx;
                if (sx < 0 || sx >= iw) continue;
                const long iidx = ((static_cast<long>(s) * ic + ci) * ih + sy) * iw + sx;
                const long widx = ((static_cast<long>(co) * ic + ci) * k + ky) * k + kx;
                if (gw) gw[widx] += g * in[iidx];
                if (gin) gin[iidx] += g * w[widx];
              }
            }
        }
}

void tconv2d_forward(const float* in, const float* w, const float* b, float* out,
                     int n, int ic, int ih, int iw, int oc, int k, int stride,
                     int pad, int oh, int ow) {
  // Bias first, then scatter every input element through the kernel.
  for (long e = 0; e < static_cast<long>(n) * oc * oh * ow; ++e) {
    int co = static_cast<int>((e / (static_cast<long>(oh) * ow)) % oc);
    out[e] += b[co];
  }
  for (int s = 0; s < n; ++s)
    for (int ci = 0; ci < ic; ++ci)
      for (int y = 0; y < ih; ++y)
        for (int x = 0; x < iw; ++x) {
          const float v = in[((static_cast<long>(s) * ic + ci) * ih + y) * iw + x];
          for (int co = 0; co < oc; ++co)
            for (int ky = 0; ky < k; ++ky) {
              int oy = y * stride - pad + ky;
              if (oy < 0 || oy >= oh) continue;
              for (int kx = 0; kx < k; ++kx) {
                int ox = x * stride - pad + kx;
                if (ox < 0 || ox >= ow) continue;
                out[((static_cast<long>(s) * oc + co) * oh + oy) * ow + ox] +=
                    v * w[((static_cast<long>(ci) * oc + co) * k + ky) * k + kx];
              }
            }
        }
}

void tconv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                      float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                      int k, int stride, int pad, int oh, int ow) {
  if (gb)
    for (int s = 0; s < n; ++s)
      for (int co = 0; co < oc; ++co)
        for (int y = 0; y < oh; ++y)
          for (int x = 0; x < ow; ++x)
            gb[co] += gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x];
  for (int s = 0; s < n; ++s)
    for (int ci = 0; ci < ic; ++ci)
      for (int y = 0; y < ih; ++y)
        for (int x = 0; x < iw; ++x) {
          const long iidx = ((static_cast<long>(s) * ic + ci) * ih + y) * iw + x;
          const float v = in[iidx];
          float gacc = 0.0f;
          for (int co = 0; co < oc; ++co)
            for (int ky = 0; ky < k; ++ky) {
              int oy = y * stride - pad + ky;
              if (oy < 0 || oy >= oh) continue;
              for (int kx = 0; kx < k; ++kx) {
                int ox = x * stride - pad + kx;
                if (ox < 0 || ox >= ow) continue;
                const float g =
                    gout[((static_cast<long>(s) * oc + co) * oh + oy) * ow + ox];
                const long widx = ((static_cast<long>(ci) * oc + co) * k + ky) * k + kx;
                if (gw) gw[widx] += g * v;
                gacc += g * w[widx];
              }
            }
          if (gin) gin[iidx] += gacc;
        }
}

void upsample_forward(const float* in, float* out, int n, int c, int ih, int iw,
                      int scale) {
  const int oh = ih * scale, ow = iw * scale;
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
          out[((static_cast<long>(s) * c + ch) * oh + y) * ow + x] +=
              in[((static_cast<long>(s) * c + ch) * ih + y / scale) * iw + x / scale];
}

void upsample_backward(const float* gout, float* gin, int n, int c, int ih, int iw,
                       int scale) {
  const int oh = ih * scale, ow = iw * scale;
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
          gin[((static_cast<long>(s) * c + ch) * ih + y / scale) * iw + x / scale] +=
              gout[((static_cast<long>(s) * c + ch) * oh + y) * ow + x];
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP kernels. Every loop is parallel over elements whose values are
// computed independently (gather form), so no two threads write the same
// location and the per-element accumulation order never depends on the
// schedule.
// ---------------------------------------------------------------------------

namespace par {

void dense_forward(const float* in, const float* w, const float* b, float* out,
                   int n, int in_f, int out_f) {
  const long total = static_cast<long>(n) * out_f;
#pragma omp parallel for schedule(static)
  for (long e = 0; e < total; ++e) {
    const int s = static_cast<int>(e / out_f);
    const int o = static_cast<int>(e % out_f);
    const float* x = in + static_cast<long>(s) * in_f;
    const float* wr = w + static_cast<long>(o) * in_f;
    float acc = b[o];
    for (int i = 0; i < in_f; ++i) acc += wr[i] * x[i];
    out[e] += acc;
  }
}

void dense_backward(const float* in, const float* w, const float* gout, float* gin,
                    float* gw, float* gb, int n, int in_f, int out_f) {
  if (gin) {
    const long total = static_cast<long>(n) * in_f;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int s = static_cast<int>(e / in_f);
      const int i = static_cast<int>(e % in_f);
      const float* go = gout + static_cast<long>(s) * out_f;
      float acc = 0.0f;
      for (int o = 0; o < out_f; ++o) acc += go[o] * w[static_cast<long>(o) * in_f + i];
      gin[e] += acc;
    }
  }
  if (gw) {
    const long total = static_cast<long>(out_f) * in_f;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int o = static_cast<int>(e / in_f);
      const int i = static_cast<int>(e % in_f);
      float acc = 0.0f;
      for (int s = 0; s < n; ++s)
        acc += gout[static_cast<long>(s) * out_f + o] * in[static_cast<long>(s) * in_f + i];
      gw[e] += acc;
    }
  }
  if (gb) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_f; ++o) {
      float acc = 0.0f;
      for (int s = 0; s < n; ++s) acc += gout[static_cast<long>(s) * out_f + o];
      gb[o] += acc;
    }
  }
}

void conv2d_forward(const float* in, const float* w, const float* b, float* out,
                    int n, int ic, int ih, int iw, int oc, int k, int stride, int pad,
                    int oh, int ow) {
  const long total = static_cast<long>(n) * oc * oh * ow;
#pragma omp parallel for schedule(static)
  for (long e = 0; e < total; ++e) {
    const int x = static_cast<int>(e % ow);
    const int y = static_cast<int>((e / ow) % oh);
    const int co = static_cast<int>((e / (static_cast<long>(ow) * oh)) % oc);
    const int s = static_cast<int>(e / (static_cast<long>(ow) * oh * oc));
    float acc = b[co];
    for (int ci = 0; ci < ic; ++ci)
      for (int ky = 0; ky < k; ++ky) {
        const int sy = y * stride - pad + ky;
        if (sy < 0 || sy >= ih) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int sx = x * stride - pad + kx;
          if (sx < 0 || sx >= iw) continue;
          acc += in[((static_cast<long>(s) * ic + ci) * ih + sy) * iw + sx] *
                 w[((static_cast<long>(co) * ic + ci) * k + ky) * k + kx];
        }
      }
    out[e] += acc;
  }
}

void conv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                     float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                     int k, int stride, int pad, int oh, int ow) {
  if (gin) {
    const long total = static_cast<long>(n) * ic * ih * iw;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int sx = static_cast<int>(e % iw);
      const int sy = static_cast<int>((e / iw) % ih);
      const int ci = static_cast<int>((e / (static_cast<long>(iw) * ih)) % ic);
      const int s = static_cast<int>(e / (static_cast<long>(iw) * ih * ic));
      float acc = 0.0f;
      for (int co = 0; co < oc; ++co)
        for (int ky = 0; ky < k; ++ky) {
          const int num_y = sy + pad - ky;
          if (num_y < 0 || num_y % stride) continue;
          const int y = num_y / stride;
          if (y >= oh) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int num_x = sx + pad - kx;
            if (num_x < 0 || num_x % stride) continue;
            const int x = num_x / stride;
            if (x >= ow) continue;
            acc += gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x] *
                   w[((static_cast<long>(co) * ic + ci) * k + ky) * k + kx];
          }
        }
      gin[e] += acc;
    }
  }
  if (gw) {
    const long total = static_cast<long>(oc) * ic * k * k;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int kx = static_cast<int>(e % k);
      const int ky = static_cast<int>((e / k) % k);
      const int ci = static_cast<int>((e / (static_cast<long>(k) * k)) % ic);
      const int co = static_cast<int>(e / (static_cast<long>(k) * k * ic));
      float acc = 0.0f;
      for (int s = 0; s < n; ++s)
        for (int y = 0; y < oh; ++y) {
          const int sy = y * stride - pad + ky;
          if (sy < 0 || sy >= ih) continue;
          for (int x = 0; x < ow; ++x) {
            const int sx = x * stride - pad + kx;
            if (sx < 0 || sx >= iw) continue;
            acc += gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x] *
                   in[((static_cast<long>(s) * ic + ci) * ih + sy) * iw + sx];
          }
        }
      gw[e] += acc;
    }
  }
  if (gb) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < oc; ++co) {
      float acc = 0.0f;
      for (int s = 0; s < n; ++s)
        for (int y = 0; y < oh; ++y)
          for (int x = 0; x < ow; ++x)
            acc += gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x];
      gb[co] += acc;
    }
  }
}

void tconv2d_forward(const float* in, const float* w, const float* b, float* out,
                     int n, int ic, int ih, int iw, int oc, int k, int stride,
                     int pad, int oh, int ow) {
  const long total = static_cast<long>(n) * oc * oh * ow;
#pragma omp parallel for schedule(static)
  for (long e = 0; e < total; ++e) {
    const int ox = static_cast<int>(e % ow);
    const int oy = static_cast<int>((e / ow) % oh);
    const int co = static_cast<int>((e / (static_cast<long>(ow) * oh)) % oc);
    const int s = static_cast<int>(e / (static_cast<long>(ow) * oh * oc));
    float acc = b[co];
    for (int ci = 0; ci < ic; ++ci)
      for (int ky = 0; ky < k; ++ky) {
        const int num_y = oy + pad - ky;
        if (num_y < 0 || num_y % stride) continue;
        const int y = num_y / stride;
        if (y >= ih) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int num_x = ox + pad - kx;
          if (num_x < 0 || num_x % stride) continue;
          const int x = num_x / stride;
          if (x >= iw) continue;
          acc += in[((static_cast<long>(s) * ic + ci) * ih + y) * iw + x] *
                 w[((static_cast<long>(ci) * oc + co) * k + ky) * k + kx];
        }
      }
    out[e] += acc;
  }
}

void tconv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                      float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                      int k, int stride, int pad, int oh, int ow) {
  if (gin) {
    const long total = static_cast<long>(n) * ic * ih * iw;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int x = static_cast<int>(e % iw);
      const int y = static_cast<int>((e / iw) % ih);
      const int ci = static_cast<int>((e / (static_cast<long>(iw) * ih)) % ic);
      const int s = static_cast<int>(e / (static_cast<long>(iw) * ih * ic));
      float acc = 0.0f;
      for (int co = 0; co < oc; ++co)
        for (int ky = 0; ky < k; ++ky) {
          const int oy = y * stride - pad + ky;
          if (oy < 0 || oy >= oh) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ox = x * stride - pad + kx;
            if (ox < 0 || ox >= ow) continue;
            acc += gout[((static_cast<long>(s) * oc + co) * oh + oy) * ow + ox] *
                   w[((static_cast<long>(ci) * oc + co) * k + ky) * k + kx];
          }
        }
      gin[e] += acc;
    }
  }
  if (gw) {
    const long total = static_cast<long>(ic) * oc * k * k;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < total; ++e) {
      const int kx = static_cast<int>(e % k);
      const int ky = static_cast<int>((e / k) % k);
      const int co = static_cast<int>((e / (static_cast<long>(k) * k)) % oc);
      const int ci = static_cast<int>(e / (static_cast<long>(k) * k * oc));
      float acc = 0.0f;
      for (int s = 0; s < n; ++s)
        for (int y = 0; y < ih; ++y) {
          const int oy = y * stride - pad + ky;
          if (oy < 0 || oy >= oh) continue;
          for (int x = 0; x < iw; ++x) {
            const int ox = x * stride - pad + kx;
            if (ox < 0 || ox >= ow) continue;
            acc += in[((static_cast<long>(s) * ic + ci) * ih + y) * iw + x] *
                   gout[((static_cast<long>(s) * oc + co) * oh + oy) * ow + ox];
          }
        }
      gw[e] += acc;
    }
  }
  if (gb) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < oc; ++co) {
      float acc = 0.0f;
      for (int s = 0; s < n; ++s)
        for (int y = 0; y < oh; ++y)
          for (int x = 0; x < ow; ++x)
            acc += gout[((static_cast<long>(s) * oc + co) * oh + y) * ow + x];
      gb[co] += acc;
    }
  }
}

void upsample_forward(const float* in, float* out, int n, int c, int ih, int iw,
                      int scale) {
  const int oh = ih * scale, ow = iw * scale;
  const long total = static_cast<long>(n) * c * oh * ow;
#pragma omp parallel for schedule(static)
  for (long e = 0; e < total; ++e) {
    const int x = static_cast<int>(e % ow);
    const int y = static_cast<int>((e / ow) % oh);
    const long sc = e / (static_cast<long>(ow) * oh);  // flat (n, c)
    out[e] += in[(sc * ih + y / scale) * iw + x / scale];
  }
}

void upsample_backward(const float* gout, float* gin, int n, int c, int ih, int iw,
                       int scale) {
  const int oh = ih * scale, ow = iw * scale;
  const long total = static_cast<long>(n) * c * ih * iw;
#pragma omp parallel for schedule(static)
  for (long e = 0; e < total; ++e) {
    const int x = static_cast<int>(e % iw);
    const int y = static_cast<int>((e / iw) % ih);
    const long sc = e / (static_cast<long>(iw) * ih);
    float acc = 0.0f;
    for (int dy = 0; dy < scale; ++dy)
      for (int dx = 0; dx < scale; ++dx)
        acc += gout[(sc * oh + y * scale + dy) * ow + x * scale + dx];
    gin[e] += acc;
  }
}

}  // namespace par

// ---------------------------------------------------------------------------
// Mode dispatch.
// ---------------------------------------------------------------------------

#define SHADOWMARK_DISPATCH(fn, ...)            \
  do {                                          \
    if (mode() == Mode::kSerial)                \
      serial::fn(__VA_ARGS__);                  \
    else                                        \
      par::fn(__VA_ARGS__);                     \
  } while (0)

void dense_forward(const float* in, const float* w, const float* b, float* out,
                   int n, int in_f, int out_f) {
  SHADOWMARK_DISPATCH(dense_forward, in, w, b, out, n, in_f, out_f);
}
void dense_backward(const float* in, const float* w, const float* gout, float* gin,
                    float* gw, float* gb, int n, int in_f, int out_f) {
  SHADOWMARK_DISPATCH(dense_backward, in, w, gout, gin, gw, gb, n, in_f, out_f);
}
void conv2d_forward(const float* in, const float* w, const float* b, float* out,
                    int n, int ic, int ih, int iw, int oc, int k, int stride, int pad,
                    int oh, int ow) {
  SHADOWMARK_DISPATCH(conv2d_forward, in, w, b, out, n, ic, ih, iw, oc, k, stride, pad,
                      oh, ow);
}
void conv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                     float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                     int k, int stride, int pad, int oh, int ow) {
  SHADOWMARK_DISPATCH(conv2d_backward, in, w, gout, gin, gw, gb, n, ic, ih, iw, oc, k,
                      stride, pad, oh, ow);
}
void tconv2d_forward(const float* in, const float* w, const float* b, float* out,
                     int n, int ic, int ih, int iw, int oc, int k, int stride,
                     int pad, int oh, int ow) {
  SHADOWMARK_DISPATCH(tconv2d_forward, in, w, b, out, n, ic, ih, iw, oc, k, stride, pad,
                      oh, ow);
}
void tconv2d_backward(const float* in, const float* w, const float* gout, float* gin,
                      float* gw, float* gb, int n, int ic, int ih, int iw, int oc,
                      int k, int stride, int pad, int oh, int ow) {
  SHADOWMARK_DISPATCH(tconv2d_backward, in, w, gout, gin, gw, gb, n, ic, ih, iw, oc, k,
                      stride, pad, oh, ow);
}
void upsample_forward(const float* in, float* out, int n, int c, int ih, int iw,
                      int scale) {
  SHADOWMARK_DISPATCH(upsample_forward, in, out, n, c, ih, iw, scale);
}
void upsample_backward(const float* gout, float* gin, int n, int c, int ih, int iw,
                       int scale) {
  SHADOWMARK_DISPATCH(upsample_backward, gout, gin, n, c, ih, iw, scale);
}

#undef SHADOWMARK_DISPATCH

}  // namespace shadowmark::kernels
