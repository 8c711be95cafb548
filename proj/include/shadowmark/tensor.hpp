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

#ifndef SHADOWMARK_TENSOR_HPP_
#define SHADOWMARK_TENSOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace shadowmark {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

// Dense row-major float32 tensor with value semantics.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<float> d);
  explicit Tensor(Shape s);  // zero-filled

  static Tensor zeros(const Shape& s) { return Tensor(s); }
  static Tensor full(const Shape& s, float v);

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;

  float& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Shape change over the same data; rejects element-count mismatch.
  Tensor reshaped(const Shape& s) const;

  uint64_t digest() const;  // FNV-1a over the raw float bytes
};

bool operator==(const Tensor& a, const Tensor& b);

// Throws Error unless a's shape equals `expect`; `what` names the operand.
void require_shape(const Tensor& a, const Shape& expect, const std::string& what);
void require_finite(const Tensor& a, const std::string& what);

}  // namespace shadowmark

#endif  // SHADOWMARK_TENSOR_HPP_
