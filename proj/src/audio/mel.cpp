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


#include "acvc/audio/mel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "acvc/audio/stft.hpp"

namespace acvc::audio {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> mel_filterbank(const DspConfig& cfg) {
  cfg.validate();
  const std::size_t bins = cfg.n_bins();
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.effective_f_max());
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(cfg.n_mels + 1));
  }
  std::vector<double> fb(cfg.n_mels * bins, 0.0);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate /
                       static_cast<double>(cfg.win_size);
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      fb[m * bins + k] = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const DspConfig& cfg) {
  cfg.validate();
  if (audio.sample_rate != cfg.sample_rate) {
    throw AudioError("mel_spectrogram: audio rate " +
                     std::to_string(audio.sample_rate) + " != config rate " +
                     std::to_string(cfg.sample_rate));
  }
  if (audio.empty()) throw AudioError("mel_spectrogram: empty audio");

  const auto spec = stft(audio.samples, cfg);
  const std::vector<double> fb = mel_filterbank(cfg);
  const std::size_t bins = cfg.n_bins();
  const std::size_t frames = cfg.frame_count(audio.size());

  MelSpectrogram mel;
  mel.n_mels = cfg.n_mels;
  mel.frames = frames;
  mel.config = cfg;
  mel.bands.resize(cfg.n_mels * frames);
  std::vector<double> power(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spec[t * bins + k]);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const double* row = fb.data() + m * bins;
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += row[k] * power[k];
      mel.bands[m * frames + t] = std::log(std::max(e, cfg.log_floor));
    }
  }
  return mel;
}

}  // namespace acvc::audio
