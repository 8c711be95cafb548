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

#ifndef SHADOWMARK_CHECKPOINT_HPP_
#define SHADOWMARK_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "shadowmark/modality.hpp"
#include "shadowmark/network.hpp"

namespace shadowmark {

// On disk a checkpoint is a directory:
//   manifest.json          role, modality, layers, shapes, seed, digest
//   params/<name>.f32      little-endian float32, row-major
// The manifest digest is FNV-1a over the parameter blobs in declaration
// order and must match on load; "protected" checkpoints load frozen.

struct CheckpointMeta {
  Role role = Role::kProtected;
  Modality modality = Modality::kI2I;
};

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

void save_checkpoint(const Network& net, const CheckpointMeta& meta,
                     const std::filesystem::path& dir);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

// Raw little-endian float32 blob I/O, shared with key and dataset files.
void write_f32_file(const std::filesystem::path& path, const float* data, size_t count);
std::vector<float> read_f32_file(const std::filesystem::path& path);

}  // namespace shadowmark

#endif  // SHADOWMARK_CHECKPOINT_HPP_
