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


#include "acvc/models/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "acvc/audio/mel.hpp"
#include "acvc/audio/stft.hpp"

namespace acvc::models {

void check_geometry(const audio::MelSpectrogram& mel,
                    const audio::DspConfig& expected) {
  const auto& c = mel.config;
  if (!(c == expected) || mel.n_mels != expected.n_mels ||
      mel.bands.size() != mel.n_mels * mel.frames) {
    throw ModelError(
        "mel geometry " + std::to_string(c.sample_rate) + "/" +
        std::to_string(c.win_size) + "/" + std::to_string(c.hop_size) + "/" +
        std::to_string(mel.n_mels) + " does not match the vocoder's " +
        std::to_string(expected.sample_rate) + "/" +
        std::to_string(expected.win_size) + "/" +
        std::to_string(expected.hop_size) + "/" +
        std::to_string(expected.n_mels));
  }
}

std::vector<double> mel_to_magnitude(const audio::MelSpectrogram& mel,
                                     std::size_t nnls_iters) {
  const auto& cfg = mel.config;
  const std::size_t bands = mel.n_mels, bins = cfg.n_bins(), frames = mel.frames;
  const std::vector<double> fb = audio::mel_filterbank(cfg);
  // Nonzero support of each triangle.
  std::vector<std::size_t> lo(bands, 0), hi(bands, 0);
  std::vector<bool> covered(bins, false);
  for (std::size_t b = 0; b < bands; ++b) {
    const double* row = fb.data() + b * bins;
    std::size_t k = 0;
    while (k < bins && row[k] == 0.0) ++k;
    lo[b] = k;
    std::size_t e = bins;
    while (e > k && row[e - 1] == 0.0) --e;
    hi[b] = e;
    for (std::size_t j = k; j < e; ++j) covered[j] = covered[j] || row[j] > 0.0;
  }
  auto project = [&](const std::vector<double>& s, std::vector<double>& out) {
    for (std::size_t b = 0; b < bands; ++b) {
      const double* row = fb.data() + b * bins;
      double acc = 0.0;
      for (std::size_t k = lo[b]; k < hi[b]; ++k) acc += row[k] * s[k];
      out[b] = acc;
    }
  };
  auto back_project = [&](const std::vector<double>& r, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < bands; ++b) {
      const double* row = fb.data() + b * bins;
      for (std::size_t k = lo[b]; k < hi[b]; ++k) out[k] += row[k] * r[b];
    }
  };

  std::vector<double> magnitude(frames * bins, 0.0);
  std::vector<double> target(bands), s(bins), numer(bins), ms(bands), denom(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    bool any = false;
    for (std::size_t b = 0; b < bands; ++b) {
      target[b] = std::max(std::exp(mel.at(b, t)) - cfg.log_floor, 0.0);
      any = any || target[b] > 0.0;
    }
    if (!any) continue;
    for (std::size_t k = 0; k < bins; ++k) s[k] = covered[k] ? 1.0 : 0.0;
    back_project(target, numer);
    for (std::size_t it = 0; it < nnls_iters; ++it) {
      project(s, ms);
      back_project(ms, denom);
      for (std::size_t k = 0; k < bins; ++k) {
        s[k] = denom[k] > 0.0 ? s[k] * numer[k] / denom[k] : 0.0;
      }
    }
    for (std::size_t k = 0; k < bins; ++k) {
      magnitude[t * bins + k] = std::sqrt(std::max(s[k], 0.0));
    }
  }
  return magnitude;
}

GriffinLim::GriffinLim(audio::DspConfig cfg, std::size_t iters,
                       std::size_t nnls_iters)
    : cfg_(cfg), iters_(iters), nnls_iters_(nnls_iters) {
  cfg_.validate();
}

audio::AudioBuffer GriffinLim::vocode(const audio::MelSpectrogram& mel) const {
  check_geometry(mel, cfg_);
  const std::size_t frames = mel.frames, bins = cfg_.n_bins();
  audio::AudioBuffer out;
  out.sample_rate = cfg_.sample_rate;
  if (frames < 2) return out;
  const std::vector<double> mag = mel_to_magnitude(mel, nnls_iters_);
  std::vector<std::complex<double>> spec(mag.begin(), mag.end());
  std::vector<double> signal;
  std::vector<float> as_float;
  for (std::size_t it = 0; it <= iters_; ++it) {
    signal = audio::istft(spec, frames, cfg_);
    if (it == iters_) break;
    as_float.assign(signal.begin(), signal.end());
    auto estimate = audio::stft(as_float, cfg_);
    for (std::size_t i = 0; i < frames * bins; ++i) {
      double a = std::abs(estimate[i]);
      spec[i] = a > 1e-12 ? mag[i] * (estimate[i] / a)
                          : std::complex<double>(mag[i], 0.0);
    }
  }
  out.samples.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out.samples[i] = static_cast<float>(std::clamp(signal[i], -1.0, 1.0));
  }
  return out;
}

audio::AudioBuffer griffin_lim_vocode(const audio::MelSpectrogram& mel,
                                      std::size_t iters) {
  return GriffinLim(audio::DspConfig{}, iters).vocode(mel);
}

}  // namespace acvc::models
