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


#include "acvc/audio/pitch.hpp"

#include <algorithm>
#include <cmath>

namespace acvc::audio {

namespace {

void check_args(const AudioBuffer& audio, const DspConfig& cfg,
                const PitchConfig& pitch) {
  cfg.validate();
  if (audio.empty()) throw AudioError("extract_pitch: empty audio");
  if (audio.sample_rate != cfg.sample_rate) {
    throw AudioError("extract_pitch: audio rate does not match config");
  }
  if (!(pitch.f0_min > 0.0) || !(pitch.f0_min < pitch.f0_max) ||
      pitch.f0_max > cfg.sample_rate / 2.0) {
    throw AudioError("extract_pitch: need 0 < f0_min < f0_max <= rate/2");
  }
  if (pitch.context_hops == 0) throw AudioError("context_hops must be >= 1");
}

}  // namespace

PitchContour estimate_raw_f0(const AudioBuffer& audio, const DspConfig& cfg,
                             const PitchConfig& pitch) {
  check_args(audio, cfg, pitch);
  const double rate = cfg.sample_rate;
  const long win = static_cast<long>(pitch.context_hops * cfg.hop_size);
  const long lag_min = std::max(1L, static_cast<long>(std::floor(rate / pitch.f0_max)));
  const long lag_max = static_cast<long>(std::ceil(rate / pitch.f0_min));
  const long n = static_cast<long>(audio.size());

  // Zero-extended copy so every window and lag stays in bounds.
  const long front = win / 2;
  const long back = win + lag_max + 2;
  std::vector<double> x(static_cast<std::size_t>(front + n + back), 0.0);
  for (long i = 0; i < n; ++i) x[front + i] = audio.samples[i];
  std::vector<double> energy(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) energy[i + 1] = energy[i] + x[i] * x[i];
  auto window_energy = [&](long start) {
    return energy[start + win] - energy[start];
  };

  const std::size_t frames = cfg.frame_count(audio.size());
  PitchContour out;
  out.f0.assign(frames, 0.0);
  out.voiced.assign(frames, false);
  std::vector<double> nccf(static_cast<std::size_t>(lag_max + 2), 0.0);
  constexpr double kSilence = 1e-10;

  for (std::size_t t = 0; t < frames; ++t) {
    // Window centred on the frame centre t * hop (shifted by `front`).
    const long start = static_cast<long>(t * cfg.hop_size);
    const double e0 = window_energy(start);
    if (e0 < kSilence) continue;
    const double* a = x.data() + start;
    for (long lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      if (lag < 1) continue;
      const double el = window_energy(start + lag);
      double r = 0.0;
      if (el >= kSilence) {
        const double* b = a + lag;
        for (long j = 0; j < win; ++j) r += a[j] * b[j];
        r /= std::sqrt(e0 * el);
      }
      nccf[lag] = r;
    }
    long best = -1;
    double best_score = -2.0;
    for (long lag = lag_min; lag <= lag_max; ++lag) {
      double score = nccf[lag] * (1.0 - pitch.octave_bias *
                                            static_cast<double>(lag) /
                                            static_cast<double>(lag_max));
      if (score > best_score) {
        best_score = score;
        best = lag;
      }
    }
    if (best < 0 || nccf[best] < pitch.voicing_threshold) continue;
    double delta = 0.0;
    if (best > 1) {
      const double l = nccf[best - 1], c = nccf[best], r = nccf[best + 1];
      const double denom = l - 2.0 * c + r;
      if (denom < 0.0) delta = std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
    }
    out.f0[t] = std::clamp(rate / (static_cast<double>(best) + delta),
                           pitch.f0_min, pitch.f0_max);
    out.voiced[t] = true;
  }
  return out;
}

PitchContour smooth_contour(const PitchContour& raw, std::size_t width) {
  PitchContour out;
  const std::size_t n = raw.f0.size();
  out.f0.resize(n);
  out.voiced.resize(n);
  const std::size_t half = width / 2;
  std::vector<double> buf;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(n, t + half + 1);
    buf.assign(raw.f0.begin() + static_cast<long>(lo),
               raw.f0.begin() + static_cast<long>(hi));
    // Lower median keeps every output an observed value.
    auto mid = buf.begin() + static_cast<long>((buf.size() - 1) / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    out.f0[t] = *mid;
    out.voiced[t] = *mid > 0.0;
  }
  return out;
}

PitchContour extract_pitch(const AudioBuffer& audio, const DspConfig& cfg,
                           const PitchConfig& pitch) {
  return smooth_contour(estimate_raw_f0(audio, cfg, pitch),
                        std::max<std::size_t>(1, pitch.median_width));
}

PitchContour extract_pitch(const AudioBuffer& audio, const DspConfig& cfg,
                           double f0_min, double f0_max) {
  PitchConfig pitch;
  pitch.f0_min = f0_min;
  pitch.f0_max = f0_max;
  return extract_pitch(audio, cfg, pitch);
}

}  // namespace acvc::audio
