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

#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "shadowmark/common.hpp"
#include "shadowmark/keysmith.hpp"
#include "shadowmark/tensor.hpp"
#include "shadowmark/wire.hpp"

using namespace shadowmark;

namespace {

std::vector<uint8_t> bytes_of(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

std::string text_of(const std::vector<uint8_t>& b) {
  return std::string(b.begin(), b.end());
}

}  // namespace

TEST_CASE("base64: RFC 4648 known-answer vectors") {
  // Section 10 of the RFC; both directions.
  const std::pair<const char*, const char*> kat[] = {
      {"", ""},           {"f", "Zg=="},       {"fo", "Zm8="},
      {"foo", "Zm9v"},    {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
      {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : kat) {
    CAPTURE(plain);
    CHECK(base64_encode(bytes_of(plain)) == enc);
    CHECK(text_of(base64_decode(enc)) == plain);
  }
  CHECK(base64_encode(bytes_of("hello world")) == "aGVsbG8gd29ybGQ=");
  CHECK(text_of(base64_decode("aGVsbG8gd29ybGQ=")) == "hello world");
}

TEST_CASE("base64: every byte value survives a round trip") {
  std::vector<uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[static_cast<size_t>(i)] = static_cast<uint8_t>(i);
  CHECK(base64_decode(base64_encode(all)) == all);

  // Random payloads across the length residues mod 3.
  Rng rng(99);
  for (int len = 0; len <= 64; ++len) {
    std::vector<uint8_t> buf(static_cast<size_t>(len));
    for (auto& b : buf) b = static_cast<uint8_t>(rng.next_u32() & 0xff);
    const std::string enc = base64_encode(buf);
    CHECK(enc.size() == (static_cast<size_t>(len) + 2) / 3 * 4);
    CHECK(base64_decode(enc) == buf);
  }
}

TEST_CASE("base64: strict decoder rejects malformed text") {
  CHECK_THROWS_WITH_AS(base64_decode("Zg="), doctest::Contains("multiple of 4"),
                       Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zm9vY"), doctest::Contains("multiple of 4"),
                       Error);
  // '=' anywhere except the final one or two symbols of the final quantum.
  CHECK_THROWS_WITH_AS(base64_decode("=g=="), doctest::Contains("padding"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Z=g="), doctest::Contains("padding"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zg==Zg=="), doctest::Contains("padding"),
                       Error);
  CHECK_THROWS_WITH_AS(base64_decode("===="), doctest::Contains("padding"), Error);
  // Real symbol after padding inside the final quantum.
  CHECK_THROWS_WITH_AS(base64_decode("Zg=g"), doctest::Contains("after padding"),
                       Error);
  // Characters outside the alphabet, including whitespace and URL-safe forms.
  CHECK_THROWS_WITH_AS(base64_decode("Zm9!"), doctest::Contains("invalid"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zm 9"), doctest::Contains("invalid"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zm9-"), doctest::Contains("invalid"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zm9_"), doctest::Contains("invalid"), Error);
  CHECK_THROWS_WITH_AS(base64_decode("Zm9\n"), doctest::Contains("invalid"), Error);
}

TEST_CASE("tensor wire form: known answer and bit-exact round trip") {
  // 1.0f is 00 00 80 3f on a little-endian wire.
  Tensor one({1});
  one.data[0] = 1.0f;
  CHECK(tensor_to_b64(one) == "AACAPw==");
  CHECK(tensor_from_b64("AACAPw==", {1}).data[0] == 1.0f);

  // Special values must survive untouched: the payload is raw bits.
  Tensor t({2, 4});
  t.data = {0.0f,
            -0.0f,
            std::numeric_limits<float>::infinity(),
            -std::numeric_limits<float>::infinity(),
            std::numeric_limits<float>::denorm_min(),
            std::numeric_limits<float>::max(),
            -1.5f,
            3.14159265f};
  const Tensor back = tensor_from_b64(tensor_to_b64(t), {2, 4});
  CHECK(back.shape == Shape{2, 4});
  CHECK(std::memcmp(back.data.data(), t.data.data(),
                    t.data.size() * sizeof(float)) == 0);
  CHECK(back.digest() == t.digest());

  // Random tensors: digest equality is bitwise equality.
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor r({3, 5, 2});
    for (auto& v : r.data) v = static_cast<float>(rng.normal() * 100.0);
    CHECK(tensor_from_b64(tensor_to_b64(r), r.shape).digest() == r.digest());
  }
}

TEST_CASE("tensor wire form: payload size must match the declared shape") {
  Tensor t({4});
  t.data = {1.0f, 2.0f, 3.0f, 4.0f};
  const std::string b64 = tensor_to_b64(t);
  CHECK_THROWS_WITH_AS(tensor_from_b64(b64, Shape{5}), doctest::Contains("bytes"),
                       Error);
  CHECK_THROWS_WITH_AS(tensor_from_b64(b64, Shape{2}), doctest::Contains("bytes"),
                       Error);
  CHECK_THROWS_WITH_AS(tensor_from_b64("", Shape{1}), doctest::Contains("bytes"),
                       Error);
  // Shape itself is validated by the tensor constructor.
  CHECK_THROWS_AS(tensor_from_b64(b64, Shape{0}), Error);
  CHECK_THROWS_AS(tensor_from_b64(b64, Shape{-4}), Error);
}
