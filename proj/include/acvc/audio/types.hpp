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
#include <stdexcept>
#include <string>
#include <vector>

namespace acvc::audio {

// Invalid audio or DSP arguments (rate mismatch, empty input, bad range).
class AudioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mono signal. Samples are expected in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 22050;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws AudioError when the rate is not positive or a sample is not
  // finite.
  void validate() const;
};

struct DspConfig {
  int sample_rate = 22050;
  std::size_t win_size = 1024;  // also the FFT size
  std::size_t hop_size = 256;
  std::size_t n_mels = 80;
  double f_min = 0.0;
  double f_max = 0.0;  // <= 0 selects sample_rate / 2
  double log_floor = 1e-5;

  double effective_f_max() const {
    return f_max > 0.0 ? f_max : sample_rate / 2.0;
  }
  std::size_t n_bins() const { return win_size / 2 + 1; }
  // Frames produced by centered framing of n samples.
  std::size_t frame_count(std::size_t n) const { return n / hop_size + 1; }
  void validate() const;
};

bool operator==(const DspConfig& a, const DspConfig& b);

// Log-mel energies stored band-major: value(b, t) = bands[b * frames + t].
struct MelSpectrogram {
  std::size_t n_mels = 0;
  std::size_t frames = 0;
  std::vector<double> bands;
  DspConfig config;

  double at(std::size_t band, std::size_t frame) const {
    return bands[band * frames + frame];
  }
  double& at(std::size_t band, std::size_t frame) {
    return bands[band * frames + frame];
  }
  // Frame-major copy, [frames x n_mels].
  std::vector<double> frame_major() const;
  static MelSpectrogram from_frame_major(const std::vector<double>& data,
                                         std::size_t frames,
                                         const DspConfig& config);
};

struct PitchContour {
  std::vector<double> f0;     // Hz, 0 for unvoiced frames
  std::vector<bool> voiced;
  std::size_t size() const { return f0.size(); }
};

}  // namespace acvc::audio
