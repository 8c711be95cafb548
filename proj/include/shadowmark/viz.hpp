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

#ifndef SHADOWMARK_VIZ_HPP_
#define SHADOWMARK_VIZ_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "shadowmark/keysmith.hpp"
#include "shadowmark/shadow_train.hpp"
#include "shadowmark/tensor.hpp"

namespace shadowmark {

// One named line on a chart; x runs 1..n implicitly (epochs).
struct ChartSeries {
  std::string label;
  std::vector<double> y;
};

// Minimal static SVG line chart: axes, ticks, legend, one polyline per
// series. No external renderer involved; the file is plain markup.
void svg_line_chart(const std::string& title, const std::vector<ChartSeries>& series,
                    const std::filesystem::path& path);

// Renders any tensor as a grayscale panel in [0, 1): images pass through
// (clamped), vectors become min-max-normalized nearest-upsampled heatmaps.
Tensor to_panel(const Tensor& t);

// Stitches equal-shape panels into one (1, H, W) sheet with separators.
Tensor tile_grid(const std::vector<std::vector<Tensor>>& rows);

// The qualitative side-by-side sheet for a trained pipeline. Columns:
// m | G(k) | M(G(k)) | D(M(G(k))) | G(k~) | M(G(k~)) | D(M(G(k~))) |
// x | M(x) | D(M(x)); one row per drawn wrong-key/query instance.
Tensor qualitative_grid(const TrainedPipeline& pipeline, const Key& key,
                        const Tensor& mark, int rows, uint64_t seed);

}  // namespace shadowmark

#endif  // SHADOWMARK_VIZ_HPP_
