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

#include "shadowmark/modality.hpp"

#include "shadowmark/common.hpp"

namespace shadowmark {

std::string role_name(Role r) {
  switch (r) {
    case Role::kKeyEncoder: return "key-encoder";
    case Role::kDecoder: return "decoder";
    case Role::kProtected: return "protected";
    case Role::kSurrogate: return "surrogate";
  }
  throw Error("role_name: bad enum value");
}

Role role_from_name(const std::string& s) {
  if (s == "key-encoder") return Role::kKeyEncoder;
  if (s == "decoder") return Role::kDecoder;
  if (s == "protected") return Role::kProtected;
  if (s == "surrogate") return Role::kSurrogate;
  throw Error("unknown role: " + s);
}

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::kI2I: return "I2I";
    case Modality::kN2I: return "N2I";
    case Modality::kNT2I: return "NT2I";
  }
  throw Error("modality_name: bad enum value");
}

Modality modality_from_name(const std::string& s) {
  if (s == "I2I" || s == "i2i") return Modality::kI2I;
  if (s == "N2I" || s == "n2i") return Modality::kN2I;
  if (s == "NT2I" || s == "nt2i") return Modality::kNT2I;
  throw Error("unknown modality: " + s);
}

Shape model_input_shape(Modality m) {
  switch (m) {
    case Modality::kI2I: return {1, 32, 32};
    case Modality::kN2I: return {100};
    case Modality::kNT2I: return {110};
  }
  throw Error("model_input_shape: bad enum value");
}

Shape model_output_shape(Modality) { return {1, 32, 32}; }

}  // namespace shadowmark
