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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "shadowmark/common.hpp"
#include "shadowmark/data_forge.hpp"
#include "shadowmark/keysmith.hpp"
#include "shadowmark/model_zoo.hpp"
#include "shadowmark/network.hpp"
#include "shadowmark/shadow_train.hpp"
#include "shadowmark/tensor.hpp"
#include "shadowmark/viz.hpp"

using namespace shadowmark;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("shadowmark_viz_" + std::to_string(Rng(std::random_device{}()).next_u32()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

size_t count_of(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size()))
    ++n;
  return n;
}

// A dense layer with zero weights and the image as bias: G(k) == image for
// every key, which makes grid contents exactly predictable.
Network const_encoder(const Tensor& image) {
  NetworkSpec spec = make_spec(
      {LayerSpec::dense(16, static_cast<int>(image.numel())),
       LayerSpec::reshape(image.shape)},
      Shape{16});
  Network net(spec, 1);
  for (auto& p : net.mutable_params()) {
    if (p.name.find("weight") != std::string::npos)
      std::fill(p.tensor.data.begin(), p.tensor.data.end(), 0.0f);
    else
      std::copy(image.data.begin(), image.data.end(), p.tensor.data.begin());
  }
  return net;
}

// 1x1 conv, weight 1, bias 0: the identity over (1,32,32) images.
Network identity_image_net() {
  NetworkSpec spec = make_spec({LayerSpec::conv2d(1, 1, 1)}, Shape{1, 32, 32});
  Network net(spec, 2);
  for (auto& p : net.mutable_params())
    std::fill(p.tensor.data.begin(), p.tensor.data.end(),
              p.name.find("weight") != std::string::npos ? 1.0f : 0.0f);
  return net;
}

}  // namespace

TEST_CASE("to_panel: images pass through with clamping only") {
  Tensor img({1, 2, 3});
  img.data = {0.25f, -1.0f, 2.0f, 0.0f, kMarkCeiling, 0.75f};
  const Tensor p = to_panel(img);
  CHECK(p.shape == Shape{1, 2, 3});
  CHECK(p.data[0] == 0.25f);
  CHECK(p.data[1] == 0.0f);           // clamped from below
  CHECK(p.data[2] == kMarkCeiling);   // clamped from above
  CHECK(p.data[4] == kMarkCeiling);
  CHECK(p.data[5] == 0.75f);

  // Rank-2 tensors count as images too.
  Tensor flat({2, 2});
  flat.data = {0.1f, 0.2f, 0.3f, 0.4f};
  const Tensor q = to_panel(flat);
  CHECK(q.shape == Shape{1, 2, 2});
  CHECK(q.data == flat.data);
}

TEST_CASE("to_panel: vectors become normalized heatmaps on a 32x32 canvas") {
  // 256 values -> 16x16 cells at scale 2 fill the canvas exactly.
  Tensor v({256});
  for (int i = 0; i < 256; ++i) v.data[static_cast<size_t>(i)] = static_cast<float>(i);
  const Tensor p = to_panel(v);
  CHECK(p.shape == Shape{1, 32, 32});
  CHECK(p.data[0] == 0.0f);                          // min maps to 0
  CHECK(p.data[31 * 32 + 31] == kMarkCeiling);       // max clamps to the ceiling
  // Every 2x2 block replicates one cell.
  CHECK(p.data[0 * 32 + 1] == p.data[0]);
  CHECK(p.data[1 * 32 + 0] == p.data[0]);
  const float mid = p.data[16 * 32 + 16];            // cell (8,8) == index 136
  CHECK(mid == doctest::Approx(136.0f / 255.0f).epsilon(1e-6));

  // 100 values -> 10x10 cells at scale 3 sit centered with a 1px border.
  Tensor w({100});
  for (int i = 0; i < 100; ++i) w.data[static_cast<size_t>(i)] = static_cast<float>(i % 7);
  const Tensor q = to_panel(w);
  CHECK(q.shape == Shape{1, 32, 32});
  CHECK(q.data[0] == 0.0f);        // border stays at canvas zero
  CHECK(q.data[0 * 32 + 31] == 0.0f);
  CHECK(q.data[31 * 32 + 31] == 0.0f);

  // A constant vector normalizes to all zeros instead of dividing by zero.
  Tensor c({64});
  std::fill(c.data.begin(), c.data.end(), 5.0f);
  const Tensor z = to_panel(c);
  for (float x : z.data) CHECK(x == 0.0f);

  // Non-square counts leave the cells past the end dark.
  Tensor odd({5});
  odd.data = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
  const Tensor o = to_panel(odd);
  CHECK(o.shape == Shape{1, 32, 32});

  // Anything of rank 3+ that is not a single-channel image is refused.
  CHECK_THROWS_WITH_AS(to_panel(Tensor({2, 3, 4})), doctest::Contains("unsupported"),
                       Error);
  CHECK_THROWS_WITH_AS(to_panel(Tensor({1, 2, 3, 4})), doctest::Contains("unsupported"),
                       Error);
}

TEST_CASE("tile_grid: layout, separators, and rejection of bad grids") {
  // 2x3 grid of 4x4 panels with 2px separators: 14x20 sheet.
  std::vector<std::vector<Tensor>> rows;
  float fill = 0.0f;
  for (int r = 0; r < 2; ++r) {
    std::vector<Tensor> row;
    for (int c = 0; c < 3; ++c) {
      Tensor p({1, 4, 4});
      std::fill(p.data.begin(), p.data.end(), fill);
      fill += 0.1f;
      row.push_back(p);
    }
    rows.push_back(row);
  }
  const Tensor sheet = tile_grid(rows);
  CHECK(sheet.shape == Shape{1, 14, 20});
  CHECK(sheet.data[0] == 1.0f);                 // separator corner
  CHECK(sheet.data[2 * 20 + 2] == 0.0f);        // panel (0,0) content
  CHECK(sheet.data[2 * 20 + 8] == doctest::Approx(0.1f));   // panel (0,1)
  CHECK(sheet.data[8 * 20 + 2] == doctest::Approx(0.3f));   // panel (1,0)
  CHECK(sheet.data[2 * 20 + 6] == 1.0f);        // vertical separator column
  CHECK(sheet.data[6 * 20 + 2] == 1.0f);        // horizontal separator row
  CHECK(sheet.data[13 * 20 + 19] == 1.0f);      // far corner separator

  CHECK_THROWS_WITH_AS(tile_grid({}), doctest::Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(tile_grid({{}}), doctest::Contains("empty"), Error);

  std::vector<std::vector<Tensor>> ragged = {{Tensor({1, 4, 4}), Tensor({1, 4, 4})},
                                             {Tensor({1, 4, 4})}};
  CHECK_THROWS_WITH_AS(tile_grid(ragged), doctest::Contains("ragged"), Error);

  std::vector<std::vector<Tensor>> mixed = {{Tensor({1, 4, 4}), Tensor({1, 2, 2})}};
  CHECK_THROWS_AS(tile_grid(mixed), Error);

  std::vector<std::vector<Tensor>> flat = {{Tensor({4, 4})}};
  CHECK_THROWS_WITH_AS(tile_grid(flat), doctest::Contains("(1, H, W)"), Error);
}

TEST_CASE("svg_line_chart: writes plain markup with one polyline per series") {
  TempDir dir;
  const fs::path out = dir.path / "chart.svg";
  std::vector<ChartSeries> series = {
      {"train", {1.0, 0.5, 0.25, 0.125, 0.0625}},
      {"holdout", {1.1, 0.7, 0.5, 0.4, 0.35}}};
  svg_line_chart("convergence", series, out);

  const std::string svg = slurp(out);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("convergence") != std::string::npos);
  CHECK(svg.find("train") != std::string::npos);
  CHECK(svg.find("holdout") != std::string::npos);
  CHECK(svg.find("epoch") != std::string::npos);
  CHECK(count_of(svg, "<polyline") == 2);
  CHECK(svg.find("NaN") == std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);

  // Flat and single-point series still render finite geometry.
  svg_line_chart("flat", {{"c", {0.5, 0.5, 0.5}}}, out);
  const std::string flat = slurp(out);
  CHECK(count_of(flat, "<polyline") == 1);
  CHECK(flat.find("nan") == std::string::npos);
  svg_line_chart("point", {{"p", {3.0}}}, out);
  CHECK(count_of(slurp(out), "<polyline") == 1);

  CHECK_THROWS_WITH_AS(svg_line_chart("t", {}, out), doctest::Contains("no series"),
                       Error);
  CHECK_THROWS_WITH_AS(svg_line_chart("t", {{"a", {}}, {"b", {}}}, out),
                       doctest::Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(
      svg_line_chart("t", {{"a", {1.0, std::numeric_limits<double>::quiet_NaN()}}}, out),
      doctest::Contains("non-finite"), Error);
  CHECK_THROWS_WITH_AS(
      svg_line_chart("t", {{"a", {std::numeric_limits<double>::infinity()}}}, out),
      doctest::Contains("non-finite"), Error);
  CHECK_THROWS_WITH_AS(
      svg_line_chart("t", {{"a", {1.0}}}, dir.path / "missing" / "chart.svg"),
      doctest::Contains("cannot write"), Error);
}

TEST_CASE("qualitative_grid: deterministic sheet with the expected geometry") {
  // Identity chain: G emits a fixed image, M and D are identity maps, so the
  // sheet layout and first column are exactly predictable.
  Tensor img({1, 32, 32});
  for (int64_t i = 0; i < img.numel(); ++i)
    img[i] = 0.5f + 0.4f * std::sin(static_cast<float>(i) * 0.01f);
  Tensor mark = render_text_mark("VIZ", {1, 32, 32}, 3);

  TrainedPipeline pipe{const_encoder(img), identity_image_net(),
                       ProtectedModelHandle(identity_image_net(), Modality::kI2I),
                       Modality::kI2I, mark.digest(), 0, {}, true};
  const Key key = keygen(16, 5);

  const Tensor sheet = qualitative_grid(pipe, key, mark, 2, 77);
  // 2 rows x 10 columns of 32x32 panels with 2px separators.
  CHECK(sheet.shape == Shape{1, 2 * 32 + 3 * 2, 10 * 32 + 11 * 2});
  // Column 0 is the mark panel; its first pixel sits at (2,2).
  const int W = 10 * 32 + 11 * 2;
  CHECK(sheet.data[2 * W + 2] == std::clamp(mark.data[0], 0.0f, kMarkCeiling));
  // Columns 1-3 show G(k), M(G(k)), D(M(G(k))) == img under the identity chain.
  for (int col = 1; col <= 3; ++col) {
    const int ox = 2 + col * (32 + 2);
    CAPTURE(col);
    CHECK(sheet.data[2 * W + ox] ==
          doctest::Approx(std::clamp(img.data[0], 0.0f, kMarkCeiling)).epsilon(1e-6));
  }

  // Same seed, same sheet; different seed, different wrong keys and queries.
  CHECK(qualitative_grid(pipe, key, mark, 2, 77).digest() == sheet.digest());
  CHECK(qualitative_grid(pipe, key, mark, 2, 78).digest() != sheet.digest());

  CHECK_THROWS_WITH_AS(qualitative_grid(pipe, key, mark, 0, 1),
                       doctest::Contains("rows"), Error);
}
