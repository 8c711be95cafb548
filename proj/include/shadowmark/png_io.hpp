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

#ifndef SHADOWMARK_PNG_IO_HPP_
#define SHADOWMARK_PNG_IO_HPP_

#include <filesystem>

#include "shadowmark/tensor.hpp"

namespace shadowmark {

// 8-bit PNG <-> float tensor with the p/256 mapping, so loaded images always
// land in [0,1). Grayscale loads as (1,H,W), RGB as (3,H,W); save accepts the
// same shapes and writes floor(v*256) clamped to 255. 16-bit files and other
// color types are rejected.

Tensor load_png(const std::filesystem::path& path);
void save_png(const Tensor& image, const std::filesystem::path& path);

}  // namespace shadowmark

#endif  // SHADOWMARK_PNG_IO_HPP_
