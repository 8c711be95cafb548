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

#include "shadowmark/checkpoint.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"
#include "shadowmark/common.hpp"

// Blobs are written as raw in-memory float bytes; this artifact assumes a
// little-endian host, which the build verifies here once.
static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs require a little-endian host");

namespace shadowmark {

namespace {

using nlohmann::json;

json layer_to_json(const LayerSpec& l) {
  json j;
  j["kind"] = layer_kind_name(l.kind);
  switch (l.kind) {
    case LayerKind::kDense:
      j["in_features"] = l.in_features;
      j["out_features"] = l.out_features;
      break;
    case LayerKind::kConv2d:
    case LayerKind::kTConv2d:
      j["in_channels"] = l.in_channels;
      j["out_channels"] = l.out_channels;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["pad"] = l.pad;
      break;
    case LayerKind::kUpsampleNearest:
      j["scale"] = l.scale;
      break;
    case LayerKind::kLeakyRelu:
      j["slope"] = l.slope;
      break;
    case LayerKind::kTanh:
      j["rescale01"] = l.rescale01;
      break;
    case LayerKind::kBatchReshape:
      j["target"] = l.target;
      break;
    case LayerKind::kRelu:
    case LayerKind::kSigmoid:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  const LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
  switch (kind) {
    case LayerKind::kDense:
      return LayerSpec::dense(j.at("in_features").get<int>(),
                              j.at("out_features").get<int>());
    case LayerKind::kConv2d:
      return LayerSpec::conv2d(j.at("in_channels").get<int>(),
                               j.at("out_channels").get<int>(), j.at("kernel").get<int>(),
                               j.at("stride").get<int>(), j.at("pad").get<int>());
    case LayerKind::kTConv2d:
      return LayerSpec::tconv2d(j.at("in_channels").get<int>(),
                                j.at("out_channels").get<int>(),
                                j.at("kernel").get<int>(), j.at("stride").get<int>(),
                                j.at("pad").get<int>());
    case LayerKind::kUpsampleNearest:
      return LayerSpec::upsample(j.at("scale").get<int>());
    case LayerKind::kRelu:
      return LayerSpec::relu();
    case LayerKind::kLeakyRelu:
      return LayerSpec::leaky_relu(j.at("slope").get<float>());
    case LayerKind::kTanh:
      return LayerSpec::tanh_act(j.value("rescale01", false));
    case LayerKind::kSigmoid:
      return LayerSpec::sigmoid();
    case LayerKind::kBatchReshape:
      return LayerSpec::reshape(j.at("target").get<Shape>());
  }
  throw Error("layer_from_json: bad kind");
}

}  // namespace

void write_f32_file(const std::filesystem::path& path, const float* data, size_t count) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(data),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!f) throw Error("short write: " + path.string());
}

std::vector<float> read_f32_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw Error("cannot open for reading: " + path.string());
  const std::streamsize bytes = f.tellg();
  if (bytes % sizeof(float) != 0)
    throw Error("file size not a multiple of 4 bytes: " + path.string());
  f.seekg(0);
  std::vector<float> out(static_cast<size_t>(bytes) / sizeof(float));
  f.read(reinterpret_cast<char*>(out.data()), bytes);
  if (!f) throw Error("short read: " + path.string());
  return out;
}

void save_checkpoint(const Network& net, const CheckpointMeta& meta,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "params");

  json manifest;
  manifest["role"] = role_name(meta.role);
  manifest["modality"] = modality_name(meta.modality);
  manifest["seed"] = net.init_seed();
  json layers = json::array();
  for (const auto& l : net.spec().layers) layers.push_back(layer_to_json(l));
  manifest["layers"] = layers;
  manifest["shapes"] = {{"input", net.spec().input_shape},
                        {"output", net.spec().output_shape}};
  json params = json::array();
  for (const auto& p : net.params()) {
    params.push_back({{"name", p.name}, {"shape", p.tensor.shape}});
    write_f32_file(dir / "params" / (p.name + ".f32"), p.tensor.data.data(),
                   p.tensor.data.size());
  }
  manifest["params"] = params;
  manifest["digest_fnv1a64"] = to_hex(net.params_digest());

  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw Error("cannot write manifest: " + (dir / "manifest.json").string());
  f << manifest.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw Error("cannot read manifest: " + (dir / "manifest.json").string());
  json manifest;
  try {
    f >> manifest;
  } catch (const json::exception& e) {
    throw Error("malformed manifest in " + dir.string() + ": " + e.what());
  }

  CheckpointMeta meta;
  try {
    meta.role = role_from_name(manifest.at("role").get<std::string>());
    meta.modality = modality_from_name(manifest.at("modality").get<std::string>());

    std::vector<LayerSpec> layers;
    for (const auto& jl : manifest.at("layers")) layers.push_back(layer_from_json(jl));
    NetworkSpec spec = make_spec(std::move(layers), manifest.at("shapes").at("input").get<Shape>());
    if (spec.output_shape != manifest.at("shapes").at("output").get<Shape>())
      throw Error("manifest output shape disagrees with layer stack");

    std::vector<Parameter> params;
    for (const auto& jp : manifest.at("params")) {
      Parameter p;
      p.name = jp.at("name").get<std::string>();
      const Shape shape = jp.at("shape").get<Shape>();
      std::vector<float> blob = read_f32_file(dir / "params" / (p.name + ".f32"));
      if (static_cast<int64_t>(blob.size()) != shape_numel(shape))
        throw Error("blob size mismatch for parameter " + p.name);
      p.tensor = Tensor(shape);
      p.tensor.data = std::move(blob);
      params.push_back(std::move(p));
    }

    Network net(std::move(spec), std::move(params));
    if (to_hex(net.params_digest()) != manifest.at("digest_fnv1a64").get<std::string>())
      throw Error("checkpoint corrupted: parameter digest mismatch in " + dir.string());
    if (meta.role == Role::kProtected) net.freeze();
    return LoadedCheckpoint{std::move(net), meta};
  } catch (const json::exception& e) {
    throw Error("malformed manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace shadowmark
