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

#ifndef SHADOWMARK_MODALITY_HPP_
#define SHADOWMARK_MODALITY_HPP_

#include <string>

#include "shadowmark/tensor.hpp"

namespace shadowmark {

// The four network roles of the toolkit: key encoder G, watermark decoder D,
// frozen protected model M, and attacker surrogate S.
enum class Role { kKeyEncoder, kDecoder, kProtected, kSurrogate };

// Supported protected-model task families (desk-scale analogs):
//   I2I  — image-to-image denoiser, input (1,32,32)
//   N2I  — noise-to-image generator, input (100,)
//   NT2I — label-conditioned generator, input (110,) = 100 noise + 10 one-hot
enum class Modality { kI2I, kN2I, kNT2I };

std::string role_name(Role r);
Role role_from_name(const std::string& s);
std::string modality_name(Modality m);
Modality modality_from_name(const std::string& s);

// Input shape of the protected model M for a modality.
Shape model_input_shape(Modality m);
// Output shape of M (identical across modalities at desk scale).
Shape model_output_shape(Modality m);

}  // namespace shadowmark

#endif  // SHADOWMARK_MODALITY_HPP_
