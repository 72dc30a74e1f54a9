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

#include <cstddef>
#include <string>
#include <vector>

#include "acvc/audio/types.hpp"
#include "acvc/models/error.hpp"

namespace acvc::models {

// Mel-to-waveform stage. Implementations must accept exactly the geometry
// returned by config().
class Vocoder {
 public:
  virtual ~Vocoder() = default;
  virtual audio::AudioBuffer vocode(const audio::MelSpectrogram& mel) const = 0;
  virtual const audio::DspConfig& config() const = 0;
  virtual std::string name() const = 0;
  virtual std::size_t parameter_count() const { return 0; }
};

// Throws ModelError unless mel was produced with `expected`.
void check_geometry(const audio::MelSpectrogram& mel,
                    const audio::DspConfig& expected);

// Linear magnitude spectrogram [frames x bins] whose mel projection best
// matches exp(mel) - floor in the least-squares sense with non-negative
// power, solved by multiplicative updates.
std::vector<double> mel_to_magnitude(const audio::MelSpectrogram& mel,
                                     std::size_t nnls_iters = 30);

// Griffin-Lim phase recovery starting from zero phase. Output has
// (frames - 1) * hop samples at the mel's sample rate.
class GriffinLim : public Vocoder {
 public:
  explicit GriffinLim(audio::DspConfig cfg = {}, std::size_t iters = 32,
                      std::size_t nnls_iters = 30);
  audio::AudioBuffer vocode(const audio::MelSpectrogram& mel) const override;
  const audio::DspConfig& config() const override { return cfg_; }
  std::string name() const override { return "griffin-lim"; }
  std::size_t iterations() const { return iters_; }

 private:
  audio::DspConfig cfg_;
  std::size_t iters_, nnls_iters_;
};

audio::AudioBuffer griffin_lim_vocode(const audio::MelSpectrogram& mel,
                                      std::size_t iters = 32);

}  // namespace acvc::models
