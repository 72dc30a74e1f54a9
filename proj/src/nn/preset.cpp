// Copyright 2026 The ACVC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "acvc/nn/preset.hpp"

#include <stdexcept>

namespace acvc::nn {

BlockPreset full_preset() {
  BlockPreset p;
  p.name = "full";
  p.jasper = {{256, 512, 512}, {11, 13, 17}, 3};
  p.decoder = {128, 192};
  p.sinc = {80, 251, 10, 16000, 50.0, 50.0};
  p.xvector = {{512, 512, 512, 512, 1500}, 512};
  p.conformer = {512, 8, 2048, 31, 12};
  p.stp_accent = {512, 8, 2048, 3};
  p.stp_accent_stacks = 2;
  p.sts = {384, 2, 1536, 3};
  p.sts_stacks = {6, 1, 1, 6};
  return p;
}

// Widths shrink by 16x (conformer 512 -> 32, STS 384 -> 32 with inner 64),
// depths by 6x for the conformer (12 -> 2) and 3x for the STS encoder and
// decoder (6 -> 2).
BlockPreset toy_preset() {
  BlockPreset p;
  p.name = "toy";
  p.jasper = {{16, 16, 16}, {5, 5, 5}, 3};
  p.decoder = {8, 192};
  p.sinc = {8, 63, 10, 16000, 50.0, 50.0};
  p.xvector = {{16, 16, 16, 16, 32}, 512};
  p.conformer = {32, 2, 64, 7, 2};
  p.stp_accent = {32, 2, 64, 3};
  p.stp_accent_stacks = 2;
  p.sts = {32, 2, 64, 3};
  p.sts_stacks = {2, 1, 1, 2};
  return p;
}

BlockPreset preset_by_name(const std::string& name) {
  if (name == "full") return full_preset();
  if (name == "toy") return toy_preset();
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected full or toy)");
}

}  // namespace acvc::nn
