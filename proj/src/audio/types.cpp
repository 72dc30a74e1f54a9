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


#include "acvc/audio/types.hpp"

#include <cmath>

namespace acvc::audio {

void AudioBuffer::validate() const {
  if (sample_rate <= 0) {
    throw AudioError("sample rate must be positive, got " +
                     std::to_string(sample_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw AudioError("non-finite sample at index " + std::to_string(i));
    }
  }
}

void DspConfig::validate() const {
  if (sample_rate <= 0) throw AudioError("sample_rate must be positive");
  if (win_size < 2) throw AudioError("win_size must be at least 2");
  if (hop_size == 0 || hop_size > win_size) {
    throw AudioError("hop_size must be in [1, win_size]");
  }
  if (n_mels == 0) throw AudioError("n_mels must be at least 1");
  const double fmax = effective_f_max();
  if (f_min < 0.0 || f_min >= fmax || fmax > sample_rate / 2.0) {
    throw AudioError("mel range must satisfy 0 <= f_min < f_max <= rate/2");
  }
  if (!(log_floor > 0.0)) throw AudioError("log_floor must be positive");
}

bool operator==(const DspConfig& a, const DspConfig& b) {
  return a.sample_rate == b.sample_rate && a.win_size == b.win_size &&
         a.hop_size == b.hop_size && a.n_mels == b.n_mels &&
         a.f_min == b.f_min && a.effective_f_max() == b.effective_f_max() &&
         a.log_floor == b.log_floor;
}

std::vector<double> MelSpectrogram::frame_major() const {
  std::vector<double> out(bands.size());
  for (std::size_t b = 0; b < n_mels; ++b) {
    for (std::size_t t = 0; t < frames; ++t) {
      out[t * n_mels + b] = bands[b * frames + t];
    }
  }
  return out;
}

MelSpectrogram MelSpectrogram::from_frame_major(const std::vector<double>& data,
                                                std::size_t frames,
                                                const DspConfig& config) {
  MelSpectrogram mel;
  mel.n_mels = config.n_mels;
  mel.frames = frames;
  mel.config = config;
  if (data.size() != frames * config.n_mels) {
    throw AudioError("frame-major data has " + std::to_string(data.size()) +
                     " values, expected " +
                     std::to_string(frames * config.n_mels));
  }
  mel.bands.resize(data.size());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < mel.n_mels; ++b) {
      mel.bands[b * frames + t] = data[t * mel.n_mels + b];
    }
  }
  return mel;
}

}  // namespace acvc::audio
