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

#ifndef SHADOWMARK_DATA_FORGE_HPP_
#define SHADOWMARK_DATA_FORGE_HPP_

#include <string>
#include <vector>

#include "shadowmark/modality.hpp"
#include "shadowmark/tensor.hpp"

namespace shadowmark {

// Watermark images: values always in [0,1) — the working ceiling is
// 1 - 2^-8 = 0.99609375, matching the p/256 pixel mapping of png_io.
inline constexpr float kMarkCeiling = 1.0f - 1.0f / 256.0f;

enum class MarkKind { kText, kBinary, kPepper, kPink };

std::string mark_kind_name(MarkKind k);
MarkKind mark_kind_from_name(const std::string& s);

// Raster `text` (A-Z, 0-9, space; case-folded) with the built-in 5x7 font,
// integer-scaled and greedily wrapped to fit, centered. Values {0, ceiling}.
// Rejects empty text, unsupported characters, and text that cannot fit.
Tensor render_text_mark(const std::string& text, const Shape& shape, uint64_t seed);

// binary: iid fair coin; pepper: 5% bright dots on black; pink: 1/f-power
// noise (random-phase spectral synthesis) min-max normalized to [0, ceiling].
Tensor make_noise_mark(MarkKind kind, const Shape& shape, uint64_t seed);

// One training example. `target` is empty (numel-0 shape ()) for N2I/NT2I,
// whose ground truth comes from the procedural renderers below.
struct TaskSample {
  Tensor input;
  Tensor target;
  Modality modality = Modality::kI2I;
};

// Deterministic synthetic datasets:
//   I2I  — anti-aliased random shape images; input = target + N(0, 0.1^2)
//   N2I  — 100-dim standard-normal noise vectors
//   NT2I — 110-dim vectors: 100 noise + 10 one-hot label tail
std::vector<TaskSample> synth_task_dataset(Modality modality, int n, uint64_t seed);

// Ground-truth images for the generator tasks, as pure functions of the
// input vector: a soft disk whose placement/contrast follow smoothed noise
// coordinates (N2I), and a positioned digit glyph for the label (NT2I).
Tensor render_n2i_target(const Tensor& noise);
Tensor render_nt2i_target(const Tensor& noise_and_label);

}  // namespace shadowmark

#endif  // SHADOWMARK_DATA_FORGE_HPP_
