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
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "shadowmark/checkpoint.hpp"
#include "shadowmark/keysmith.hpp"
#include "shadowmark/model_zoo.hpp"

using namespace shadowmark;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& leaf) {
  const fs::path d = fs::temp_directory_path() / "shadowmark_test_zoo" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("keygen: determinism, spread, validation") {
  Key a = keygen(256, 7);
  Key b = keygen(256, 7);
  CHECK(a.values == b.values);
  CHECK(a.dim() == 256);
  CHECK(key_digest(a) == key_digest(b));

  // Independent draws sit ~sqrt(2*256) ~ 22.6 apart in L2.
  Key c = keygen(256, 8);
  CHECK(key_distance(a, c) > 5.0);
  CHECK(key_distance(a, c) < 40.0);
  CHECK(key_distance(a, a) == 0.0);

  CHECK_THROWS_AS(keygen(15, 1), Error);
  CHECK(keygen(16, 1).dim() == 16);

  Tensor t = key_tensor(a);
  CHECK(t.shape == Shape{256});
  CHECK(t.data == a.values);
}

TEST_CASE("wrong keys: distance floor and keygen-like distribution") {
  Key correct = keygen(256, 7);
  Rng rng(100);

  Key w1 = sample_wrong_key(correct, rng);
  Key w2 = sample_wrong_key(correct, rng);
  CHECK(w1.dim() == 256);
  CHECK(key_distance(w1, correct) >= kMinWrongKeyDistance);
  CHECK(key_distance(w2, correct) >= kMinWrongKeyDistance);
  CHECK_FALSE(w1.values == w2.values);

  // First coordinate over many draws is standard normal (KS, p > 0.01).
  std::vector<double> first;
  first.reserve(10000);
  Rng big(555);
  for (int i = 0; i < 10000; ++i)
    first.push_back(sample_wrong_key(correct, big).values[0]);
  const double p = testing::ks_p_value(std::move(first), testing::std_normal_cdf);
  CHECK(p > 0.01);
}

TEST_CASE("key files: round-trip and corruption detection") {
  const fs::path dir = temp_dir("keys");
  Key k = keygen(64, 3);

  save_key(k, dir / "owner.key");
  Key back = load_key(dir / "owner.key");
  CHECK(back.values == k.values);
  REQUIRE(back.seed.has_value());
  CHECK(*back.seed == 3);

  SUBCASE("truncated payload") {
    std::error_code ec;
    fs::resize_file(dir / "owner.key", 4 * 63, ec);
    REQUIRE(!ec);
    CHECK_THROWS_AS(load_key(dir / "owner.key"), Error);
  }

  SUBCASE("edited sidecar digest") {
    std::ifstream in(dir / "owner.key.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("digest_fnv1a64");
    REQUIRE(pos != std::string::npos);
    text[text.find(':', pos) + 3] = text[text.find(':', pos) + 3] == 'a' ? 'b' : 'a';
    std::ofstream out(dir / "owner.key.json", std::ios::trunc);
    out << text;
    out.close();
    CHECK_THROWS_WITH_AS(load_key(dir / "owner.key"), doctest::Contains("digest"), Error);
  }

  SUBCASE("flipped payload byte") {
    std::fstream f(dir / "owner.key", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(10);
    char c;
    f.seekg(10);
    f.get(c);
    f.seekp(10);
    f.put(static_cast<char>(c ^ 0x40));
    f.close();
    CHECK_THROWS_WITH_AS(load_key(dir / "owner.key"), doctest::Contains("digest"), Error);
  }
}

TEST_CASE("model zoo: role/shape closure for every modality") {
  for (Modality m : {Modality::kI2I, Modality::kN2I, Modality::kNT2I}) {
    CAPTURE(modality_name(m));
    NetworkSpec g = build_network_spec(Role::kKeyEncoder, m, 256);
    NetworkSpec d = build_network_spec(Role::kDecoder, m, 0);
    NetworkSpec p = build_network_spec(Role::kProtected, m, 0);
    NetworkSpec s = build_network_spec(Role::kSurrogate, m, 0);

    CHECK(g.input_shape == Shape{256});
    CHECK(g.output_shape == model_input_shape(m));   // G feeds M
    CHECK(d.input_shape == model_output_shape(m));   // D consumes M's output
    CHECK(d.output_shape == model_output_shape(m));  // mark shape == output shape
    CHECK(p.input_shape == model_input_shape(m));
    CHECK(p.output_shape == model_output_shape(m));
    CHECK(s.input_shape == p.input_shape);  // surrogate mimics M end to end
    CHECK(s.output_shape == p.output_shape);
  }

  CHECK_THROWS_AS(build_network_spec(Role::kKeyEncoder, Modality::kI2I, 8), Error);

  // Same seed, same digest; different seed, different digest.
  Network n1 = build_network(Role::kKeyEncoder, Modality::kI2I, 256, 1);
  Network n2 = build_network(Role::kKeyEncoder, Modality::kI2I, 256, 1);
  Network n3 = build_network(Role::kKeyEncoder, Modality::kI2I, 256, 2);
  CHECK(n1.params_digest() == n2.params_digest());
  CHECK(n1.params_digest() != n3.params_digest());
}

TEST_CASE("checkpoints: round-trip, tampering, role enforcement") {
  const fs::path dir = temp_dir("ckpt");
  Network net = build_network(Role::kDecoder, Modality::kI2I, 0, 42);
  Rng rng(5);
  Tensor probe = testing::random_normal({1, 32, 32}, rng, 0.3);
  const Tensor before = forward(net, probe);

  save_checkpoint(net, CheckpointMeta{Role::kDecoder, Modality::kI2I}, dir / "d");
  LoadedCheckpoint loaded = load_checkpoint(dir / "d");
  CHECK(loaded.meta.role == Role::kDecoder);
  CHECK(loaded.meta.modality == Modality::kI2I);
  CHECK_FALSE(loaded.net.frozen());

  // Bit-exact forward reproduction.
  const Tensor after = forward(loaded.net, probe);
  CHECK(before.data == after.data);

  SUBCASE("tampered blob byte fails the digest") {
    std::fstream f(dir / "d" / "params" / "l0.weight.f32",
                   std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.is_open());
    char c;
    f.seekg(7);
    f.get(c);
    f.seekp(7);
    f.put(static_cast<char>(c ^ 0x01));
    f.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "d"), doctest::Contains("digest"), Error);
  }

  SUBCASE("missing manifest") {
    CHECK_THROWS_AS(load_checkpoint(dir / "nowhere"), Error);
  }

  SUBCASE("protected role loads frozen") {
    Network m = build_network(Role::kProtected, Modality::kI2I, 0, 9);
    save_checkpoint(m, CheckpointMeta{Role::kProtected, Modality::kI2I}, dir / "m");
    LoadedCheckpoint lm = load_checkpoint(dir / "m");
    CHECK(lm.net.frozen());
    for (const auto& p : lm.net.params()) CHECK_FALSE(p.trainable);
  }
}

TEST_CASE("protected handle: freeze and integrity") {
  Network m = build_network(Role::kProtected, Modality::kN2I, 0, 11);
  ProtectedModelHandle handle(std::move(m), Modality::kN2I);
  const uint64_t digest = handle.digest();

  Rng rng(2);
  Tensor z = testing::random_normal({100}, rng);
  Tensor y = handle.forward(z);
  CHECK(y.shape == Shape{1, 32, 32});
  // Sigmoid head: output in (0,1) with visible variation even untrained.
  float mn = 1.0f, mx = 0.0f;
  for (float v : y.data) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mx > mn);

  handle.check_integrity();
  CHECK(handle.digest() == digest);

  // Shape mismatch with the declared modality is rejected.
  Network wrong = build_network(Role::kProtected, Modality::kI2I, 0, 1);
  CHECK_THROWS_AS(ProtectedModelHandle(std::move(wrong), Modality::kN2I), Error);
}

TEST_CASE("protected model checkpoint round-trip stays frozen") {
  const fs::path dir = temp_dir("protected");
  Network m = build_network(Role::kProtected, Modality::kI2I, 0, 77);
  ProtectedModelHandle handle(std::move(m), Modality::kI2I);
  save_protected_model(handle, dir / "m");

  ProtectedModelHandle back = load_protected_model(dir / "m");
  CHECK(back.digest() == handle.digest());
  CHECK(back.network().frozen());

  // A non-protected checkpoint is rejected by the protected loader.
  Network d = build_network(Role::kDecoder, Modality::kI2I, 0, 1);
  save_checkpoint(d, CheckpointMeta{Role::kDecoder, Modality::kI2I}, dir / "d");
  CHECK_THROWS_AS(load_protected_model(dir / "d"), Error);
}
