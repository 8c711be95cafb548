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

#include "shadowmark/data_forge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "shadowmark/common.hpp"
#include "shadowmark/rng.hpp"

namespace shadowmark {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Classic 5x7 glyphs, one byte per row, low 5 bits used.
struct Glyph {
  char ch;
  unsigned char rows[7];
};

constexpr Glyph kFont[] = {
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {' ', {0, 0, 0, 0, 0, 0, 0}},
};

const Glyph* find_glyph(char c) {
  for (const auto& g : kFont)
    if (g.ch == c) return &g;
  return nullptr;
}

void require_mark_shape(const Shape& shape, int min_hw) {
  if (shape.size() != 3 || shape[0] != 1)
    throw Error("watermark shape must be (1,H,W), got " + shape_str(shape));
  if (shape[1] < min_hw || shape[2] < min_hw)
    throw Error("watermark raster too small, need at least " + std::to_string(min_hw) +
                "x" + std::to_string(min_hw) + ", got " + shape_str(shape));
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Paints `value` over img with per-pixel alpha coverage.
void paint(Tensor& img, int h, int w, double value,
           const std::function<double(double, double)>& coverage) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = coverage(y + 0.5, x + 0.5);
      if (a <= 0.0) continue;
      float& p = img[static_cast<int64_t>(y) * w + x];
      p = static_cast<float>(p + a * (value - p));
    }
}

void clamp_to_range(Tensor& img) {
  for (auto& v : img.data) v = std::clamp(v, 0.0f, kMarkCeiling);
}

// Chunk means of a vector: smooth, low-dimensional features of the noise so
// the generator tasks are learnable.
double chunk_mean(const Tensor& v, int chunk, int n_chunks) {
  const int64_t total = v.numel();
  const int64_t per = total / n_chunks;
  double s = 0.0;
  for (int64_t i = chunk * per; i < (chunk + 1) * per; ++i) s += v[i];
  return s / static_cast<double>(per);
}

Tensor disk_image(double cy, double cx, double r, double fg, double bg) {
  const Shape shape = model_output_shape(Modality::kN2I);
  const int h = shape[1], w = shape[2];
  Tensor img = Tensor::full(shape, static_cast<float>(bg));
  paint(img, h, w, fg, [&](double y, double x) {
    const double d = std::sqrt((y - cy) * (y - cy) + (x - cx) * (x - cx));
    return 1.0 - smoothstep(r - 1.0, r + 1.0, d);
  });
  clamp_to_range(img);
  return img;
}

}  // namespace

std::string mark_kind_name(MarkKind k) {
  switch (k) {
    case MarkKind::kText: return "text";
    case MarkKind::kBinary: return "binary";
    case MarkKind::kPepper: return "pepper";
    case MarkKind::kPink: return "pink";
  }
  throw Error("mark_kind_name: bad enum value");
}

MarkKind mark_kind_from_name(const std::string& s) {
  if (s == "text") return MarkKind::kText;
  if (s == "binary") return MarkKind::kBinary;
  if (s == "pepper") return MarkKind::kPepper;
  if (s == "pink") return MarkKind::kPink;
  throw Error("unknown mark kind: " + s);
}

Tensor render_text_mark(const std::string& text, const Shape& shape, uint64_t /*seed*/) {
  require_mark_shape(shape, 16);
  if (text.empty()) throw Error("render_text_mark: empty text");

  std::string up;
  for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  std::vector<const Glyph*> glyphs;
  for (char c : up) {
    const Glyph* g = find_glyph(c);
    if (!g) throw Error(std::string("render_text_mark: unsupported character '") + c + "'");
    glyphs.push_back(g);
  }

  const int h = shape[1], w = shape[2];
  const int len = static_cast<int>(glyphs.size());

  // Pick the largest integer scale whose greedy wrap fits the raster.
  // A row of n glyphs spans 6*s*n - s pixels; r rows span 8*s*r - s.
  int scale = 0, per_row = 0, rows = 0;
  for (int s = 8; s >= 1; --s) {
    const int fit = (w + s) / (6 * s);
    if (fit < 1) continue;
    const int r = (len + fit - 1) / fit;
    if (8 * s * r - s <= h) {
      scale = s;
      per_row = fit;
      rows = r;
      break;
    }
  }
  if (scale == 0)
    throw Error("render_text_mark: text does not fit a " + std::to_string(h) + "x" +
                std::to_string(w) + " raster");

  Tensor img(shape);
  const int total_h = 8 * scale * rows - scale;
  const int y0 = (h - total_h) / 2;
  for (int r = 0; r < rows; ++r) {
    const int start = r * per_row;
    const int count = std::min(per_row, len - start);
    const int row_w = 6 * scale * count - scale;
    const int x0 = (w - row_w) / 2;
    for (int i = 0; i < count; ++i) {
      const Glyph* g = glyphs[static_cast<size_t>(start + i)];
      for (int gy = 0; gy < 7; ++gy)
        for (int gx = 0; gx < 5; ++gx) {
          if (!((g->rows[gy] >> (4 - gx)) & 1)) continue;
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx) {
              const int py = y0 + 8 * scale * r + gy * scale + sy;
              const int px = x0 + 6 * scale * i + gx * scale + sx;
              img[static_cast<int64_t>(py) * w + px] = kMarkCeiling;
            }
        }
    }
  }
  return img;
}

Tensor make_noise_mark(MarkKind kind, const Shape& shape, uint64_t seed) {
  require_mark_shape(shape, 1);
  const int h = shape[1], w = shape[2];
  Rng rng = Rng(seed).derive("mark-" + mark_kind_name(kind));
  Tensor img(shape);

  switch (kind) {
    case MarkKind::kBinary:
      for (auto& v : img.data) v = rng.uniform() < 0.5 ? 0.0f : kMarkCeiling;
      return img;
    case MarkKind::kPepper:
      for (auto& v : img.data) v = rng.uniform() < 0.05 ? kMarkCeiling : 0.0f;
      return img;
    case MarkKind::kPink: {
      // Random-phase spectral synthesis: cosine gratings whose amplitude is
      // (fy^2+fx^2)^(-1/4), i.e. power falling as 1/f.
      std::vector<double> acc(static_cast<size_t>(h) * w, 0.0);
      for (int fy = 0; fy <= h / 2; ++fy)
        for (int fx = -w / 2; fx <= w / 2; ++fx) {
          if (fy == 0 && fx <= 0) continue;  // DC and mirrored 0-row waves
          const double amp = std::pow(static_cast<double>(fy) * fy +
                                          static_cast<double>(fx) * fx,
                                      -0.25);
          const double phase = rng.uniform(0.0, 2.0 * kPi);
          for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
              acc[static_cast<size_t>(y) * w + x] +=
                  amp * std::cos(2.0 * kPi * (static_cast<double>(fy) * y / h +
                                              static_cast<double>(fx) * x / w) +
                                 phase);
        }
      const auto [mn, mx] = std::minmax_element(acc.begin(), acc.end());
      const double span = *mx - *mn;
      for (int64_t i = 0; i < img.numel(); ++i)
        img[i] = static_cast<float>((acc[static_cast<size_t>(i)] - *mn) / span *
                                    kMarkCeiling);
      return img;
    }
    case MarkKind::kText:
      throw Error("make_noise_mark: use render_text_mark for text marks");
  }
  throw Error("make_noise_mark: unknown kind");
}

std::vector<TaskSample> synth_task_dataset(Modality modality, int n, uint64_t seed) {
  if (n < 1) throw Error("synth_task_dataset: n must be >= 1");
  Rng root = Rng(seed).derive("dataset-" + modality_name(modality));
  std::vector<TaskSample> out;
  out.reserve(static_cast<size_t>(n));

  for (int i = 0; i < n; ++i) {
    Rng rng = root.derive(static_cast<uint64_t>(i));
    TaskSample s;
    s.modality = modality;
    switch (modality) {
      case Modality::kI2I: {
        const Shape shape = model_output_shape(modality);
        const int h = shape[1], w = shape[2];
        Tensor clean = Tensor::full(shape, static_cast<float>(rng.uniform(0.05, 0.25)));
        const int n_shapes = rng.uniform_int(2, 4);
        for (int k = 0; k < n_shapes; ++k) {
          const double fg = rng.uniform(0.3, 0.95);
          const double cy = rng.uniform(4.0, h - 4.0), cx = rng.uniform(4.0, w - 4.0);
          if (rng.uniform() < 0.5) {
            const double r = rng.uniform(3.0, 9.0);
            paint(clean, h, w, fg, [&](double y, double x) {
              const double d = std::hypot(y - cy, x - cx);
              return 1.0 - smoothstep(r - 1.0, r + 1.0, d);
            });
          } else {
            const double ry = rng.uniform(2.5, 7.0), rx = rng.uniform(2.5, 7.0);
            paint(clean, h, w, fg, [&](double y, double x) {
              const double d = std::max(std::fabs(y - cy) - ry, std::fabs(x - cx) - rx);
              return 1.0 - smoothstep(-1.0, 1.0, d);
            });
          }
        }
        clamp_to_range(clean);
        s.target = clean;
        s.input = clean;
        for (auto& v : s.input.data) v += static_cast<float>(rng.normal() * 0.1);
        break;
      }
      case Modality::kN2I: {
        s.input = Tensor({100});
        for (auto& v : s.input.data) v = static_cast<float>(rng.normal());
        break;
      }
      case Modality::kNT2I: {
        s.input = Tensor({110});
        for (int j = 0; j < 100; ++j) s.input[j] = static_cast<float>(rng.normal());
        const int label = rng.uniform_int(0, 9);
        s.input[100 + label] = 1.0f;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

Tensor render_n2i_target(const Tensor& noise) {
  require_shape(noise, model_input_shape(Modality::kN2I), "N2I noise");
  const Shape shape = model_output_shape(Modality::kN2I);
  const int h = shape[1], w = shape[2];
  const double cy = h / 2.0 + 0.25 * h * std::tanh(chunk_mean(noise, 0, 5));
  const double cx = w / 2.0 + 0.25 * w * std::tanh(chunk_mean(noise, 1, 5));
  const double r = 6.0 + 3.0 * std::tanh(chunk_mean(noise, 2, 5));
  const double fg = 0.55 + 0.35 * std::tanh(chunk_mean(noise, 3, 5));
  const double bg = 0.13 + 0.05 * std::tanh(chunk_mean(noise, 4, 5));
  return disk_image(cy, cx, r, fg, bg);
}

Tensor render_nt2i_target(const Tensor& noise_and_label) {
  require_shape(noise_and_label, model_input_shape(Modality::kNT2I), "NT2I input");
  int label = -1;
  for (int j = 0; j < 10; ++j)
    if (noise_and_label[100 + j] > 0.5f) {
      if (label >= 0) throw Error("render_nt2i_target: label tail is not one-hot");
      label = j;
    }
  if (label < 0) throw Error("render_nt2i_target: label tail is not one-hot");

  const Shape shape = model_output_shape(Modality::kNT2I);
  const int h = shape[1], w = shape[2];

  Tensor noise({100});
  std::copy_n(noise_and_label.data.begin(), 100, noise.data.begin());
  const double jy = 4.0 * std::tanh(chunk_mean(noise, 0, 4));
  const double jx = 4.0 * std::tanh(chunk_mean(noise, 1, 4));
  const double fg = 0.6 + 0.3 * std::tanh(chunk_mean(noise, 2, 4));
  const double bg = 0.12 + 0.05 * std::tanh(chunk_mean(noise, 3, 4));

  const Glyph* g = find_glyph(static_cast<char>('0' + label));
  const int scale = 3;  // 15x21 glyph box
  const double y0 = (h - 7 * scale) / 2.0 + jy;
  const double x0 = (w - 5 * scale) / 2.0 + jx;

  Tensor img = Tensor::full(shape, static_cast<float>(bg));
  paint(img, h, w, fg, [&](double y, double x) {
    // Soft coverage: sample the glyph box with a ~1px feather at cell edges.
    const double gy = (y - y0) / scale, gx = (x - x0) / scale;
    if (gy < -0.5 || gy >= 7.5 || gx < -0.5 || gx >= 5.5) return 0.0;
    double best = 0.0;
    for (int cy = 0; cy < 7; ++cy)
      for (int cx = 0; cx < 5; ++cx) {
        if (!((g->rows[cy] >> (4 - cx)) & 1)) continue;
        // Distance (in glyph cells) from the cell's box.
        const double dy = std::max({cy - gy, gy - (cy + 1.0), 0.0});
        const double dx = std::max({cx - gx, gx - (cx + 1.0), 0.0});
        best = std::max(best, 1.0 - smoothstep(0.0, 0.5, std::hypot(dy, dx)));
      }
    return best;
  });
  clamp_to_range(img);
  return img;
}

}  // namespace shadowmark
