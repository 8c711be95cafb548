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

#ifndef SHADOWMARK_WIRE_HPP_
#define SHADOWMARK_WIRE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "shadowmark/tensor.hpp"

namespace shadowmark {

// RFC 4648 base64 with padding, the wire form for float payloads.
std::string base64_encode(const uint8_t* data, size_t n);
std::string base64_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> base64_decode(const std::string& text);  // strict: throws

// Tensor payloads travel as base64 little-endian float32 plus a shape array.
// Round-trips are bit-exact.
std::string tensor_to_b64(const Tensor& t);
Tensor tensor_from_b64(const std::string& b64, const Shape& shape);

}  // namespace shadowmark

#endif  // SHADOWMARK_WIRE_HPP_
