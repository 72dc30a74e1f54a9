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


#pragma once

#include <stdexcept>
#include <string>

#include "acvc/audio/types.hpp"

namespace acvc::audio {

class WavError : public std::runtime_error {
 public:
  enum class Kind { kMissingFile, kMalformedHeader, kUnsupportedEncoding, kIo };
  WavError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file (PCM16 or IEEE float32, any channel count) and
// averages channels to mono.
AudioBuffer load_wav(const std::string& path);

// PCM16 output clips to [-1, 1] and rounds to nearest.
void save_wav(const std::string& path, const AudioBuffer& audio,
              WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace acvc::audio
