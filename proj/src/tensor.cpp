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

#include "shadowmark/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "shadowmark/common.hpp"

namespace shadowmark {

std::string to_hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

uint64_t from_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d <= 0) throw Error("tensor shape has non-positive dim " + shape_str(s));
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_numel(shape) != static_cast<int64_t>(data.size()))
    throw Error("tensor data size " + std::to_string(data.size()) +
                " does not match shape " + shape_str(shape));
}

Tensor::Tensor(Shape s) : shape(std::move(s)) {
  data.assign(static_cast<size_t>(shape_numel(shape)), 0.0f);
}

Tensor Tensor::full(const Shape& s, float v) {
  Tensor t(s);
  for (auto& x : t.data) x = v;
  return t;
}

bool Tensor::all_finite() const {
  for (float v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::reshaped(const Shape& s) const {
  if (shape_numel(s) != numel())
    throw Error("reshape " + shape_str(shape) + " -> " + shape_str(s) +
                " changes element count");
  Tensor t;
  t.shape = s;
  t.data = data;
  return t;
}

uint64_t Tensor::digest() const {
  return fnv1a64(data.data(), data.size() * sizeof(float));
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && a.data == b.data;
}

void require_shape(const Tensor& a, const Shape& expect, const std::string& what) {
  if (a.shape != expect)
    throw Error(what + ": expected shape " + shape_str(expect) + ", got " +
                shape_str(a.shape));
}

void require_finite(const Tensor& a, const std::string& what) {
  if (!a.all_finite()) throw Error(what + ": non-finite values");
}

}  // namespace shadowmark
