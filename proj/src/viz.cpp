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

#include "shadowmark/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shadowmark/common.hpp"
#include "shadowmark/data_forge.hpp"

namespace shadowmark {

namespace {

constexpr int kW = 640, kH = 400;
constexpr int kMarginL = 64, kMarginR = 20, kMarginT = 40, kMarginB = 44;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt_g(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// Panel separator brightness: white gridlines between tiles.
constexpr float kSep = 1.0f;
constexpr int kSepPx = 2;

}  // namespace

void svg_line_chart(const std::string& title, const std::vector<ChartSeries>& series,
                    const std::filesystem::path& path) {
  if (series.empty()) throw Error("svg_line_chart: no series");
  size_t n_max = 0;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& s : series) {
    n_max = std::max(n_max, s.y.size());
    for (double v : s.y) {
      if (!std::isfinite(v)) throw Error("svg_line_chart: non-finite value");
      if (!any) {
        lo = hi = v;
        any = true;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any) throw Error("svg_line_chart: all series empty");
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double plot_w = kW - kMarginL - kMarginR;
  const double plot_h = kH - kMarginT - kMarginB;
  const auto x_at = [&](size_t i, size_t n) {
    return n <= 1 ? kMarginL + plot_w / 2
                  : kMarginL + plot_w * static_cast<double>(i) /
                        static_cast<double>(n - 1);
  };
  const auto y_at = [&](double v) {
    return kMarginT + plot_h * (1.0 - (v - lo) / (hi - lo));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\""
      << kMarginL << "\" y2=\"" << kMarginT + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT + plot_h
      << "\" x2=\"" << kMarginL + plot_w << "\" y2=\"" << kMarginT + plot_h
      << "\" stroke=\"black\"/>\n";

  // Y ticks.
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = y_at(v);
    svg << "<line x1=\"" << kMarginL - 4 << "\" y1=\"" << y << "\" x2=\""
        << kMarginL << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kMarginL - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_g(v) << "</text>\n";
  }
  // X ticks: up to 6 integer epochs.
  const int ticks = static_cast<int>(std::min<size_t>(6, n_max));
  for (int t = 0; t < ticks; ++t) {
    const size_t i =
        ticks <= 1 ? 0 : static_cast<size_t>(t) * (n_max - 1) / (ticks - 1);
    const double x = x_at(i, n_max);
    svg << "<line x1=\"" << x << "\" y1=\"" << kMarginT + plot_h << "\" x2=\""
        << x << "\" y2=\"" << kMarginT + plot_h + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << kMarginT + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << i + 1 << "</text>\n";
  }
  svg << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kH - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">epoch</text>\n";

  // Series polylines and legend.
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (!series[s].y.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < series[s].y.size(); ++i)
        svg << x_at(i, series[s].y.size()) << "," << y_at(series[s].y[i]) << " ";
      svg << "\"/>\n";
    }
    const double ly = kMarginT + 14.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kW - kMarginR - 120 << "\" y1=\"" << ly << "\" x2=\""
        << kW - kMarginR - 100 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kW - kMarginR - 94 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].label
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write chart: " + path.string());
  f << svg.str();
}

Tensor to_panel(const Tensor& t) {
  const bool image = (t.shape.size() == 3 && t.shape[0] == 1) || t.shape.size() == 2;
  if (image) {
    const int h = t.shape[t.shape.size() == 3 ? 1 : 0];
    const int w = t.shape[t.shape.size() == 3 ? 2 : 1];
    Tensor p(Shape{1, h, w});
    for (int64_t i = 0; i < t.numel(); ++i)
      p[i] = std::clamp(t[i], 0.0f, kMarkCeiling);
    return p;
  }
  if (t.shape.size() != 1)
    throw Error("to_panel: unsupported shape " + shape_str(t.shape));

  // Vector heatmap: near-square cells, min-max normalized, nearest-upsampled
  // onto a 32x32 canvas.
  const int n = t.shape[0];
  const int h = std::max(1, static_cast<int>(std::floor(std::sqrt(double(n)))));
  const int w = (n + h - 1) / h;
  float lo = t[0], hi = t[0];
  for (int64_t i = 0; i < t.numel(); ++i) {
    lo = std::min(lo, t[i]);
    hi = std::max(hi, t[i]);
  }
  const float range = hi - lo > 1e-12f ? hi - lo : 1.0f;
  const int s = std::max(1, 32 / std::max(h, w));
  Tensor p(Shape{1, 32, 32});
  const int oy = (32 - h * s) / 2, ox = (32 - w * s) / 2;
  for (int y = 0; y < h * s && oy + y < 32; ++y)
    for (int x = 0; x < w * s && ox + x < 32; ++x) {
      const int idx = (y / s) * w + (x / s);
      if (idx < n)
        p[(oy + y) * 32 + ox + x] =
            std::min((t[idx] - lo) / range, kMarkCeiling);
    }
  return p;
}

Tensor tile_grid(const std::vector<std::vector<Tensor>>& rows) {
  if (rows.empty() || rows[0].empty()) throw Error("tile_grid: empty grid");
  const Shape cell = rows[0][0].shape;
  if (cell.size() != 3 || cell[0] != 1)
    throw Error("tile_grid: panels must be (1, H, W), got " + shape_str(cell));
  const size_t cols = rows[0].size();
  for (const auto& row : rows) {
    if (row.size() != cols) throw Error("tile_grid: ragged rows");
    for (const auto& p : row) require_shape(p, cell, "grid panel");
  }
  const int ch = cell[1], cw = cell[2];
  const int rows_n = static_cast<int>(rows.size()), cols_n = static_cast<int>(cols);
  const int H = rows_n * ch + (rows_n + 1) * kSepPx;
  const int W = cols_n * cw + (cols_n + 1) * kSepPx;
  Tensor sheet(Shape{1, H, W});
  std::fill(sheet.data.begin(), sheet.data.end(), kSep);
  for (int r = 0; r < rows_n; ++r)
    for (int c = 0; c < cols_n; ++c) {
      const int oy = kSepPx + r * (ch + kSepPx), ox = kSepPx + c * (cw + kSepPx);
      const Tensor& p = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
          sheet[(oy + y) * W + ox + x] = p[y * cw + x];
    }
  return sheet;
}

Tensor qualitative_grid(const TrainedPipeline& pipeline, const Key& key,
                        const Tensor& mark, int rows, uint64_t seed) {
  if (rows < 1) throw Error("qualitative_grid: rows must be >= 1");
  Rng rng = Rng(seed).derive("qualitative-grid");
  const auto queries = synth_task_dataset(pipeline.modality, rows, seed);

  const Tensor gk = forward(pipeline.g, key_tensor(key));
  const Tensor mgk = pipeline.m.forward(gk);
  const Tensor dmgk = forward(pipeline.d, mgk);

  std::vector<std::vector<Tensor>> grid;
  for (int r = 0; r < rows; ++r) {
    const Key wrong = sample_wrong_key(key, rng);
    const Tensor gw = forward(pipeline.g, key_tensor(wrong));
    const Tensor mgw = pipeline.m.forward(gw);
    const Tensor dmgw = forward(pipeline.d, mgw);
    const Tensor& x = queries[static_cast<size_t>(r)].input;
    const Tensor mx = pipeline.m.forward(x);
    const Tensor dmx = forward(pipeline.d, mx);
    grid.push_back({to_panel(mark), to_panel(gk), to_panel(mgk), to_panel(dmgk),
                    to_panel(gw), to_panel(mgw), to_panel(dmgw), to_panel(x),
                    to_panel(mx), to_panel(dmx)});
  }
  return tile_grid(grid);
}

}  // namespace shadowmark
