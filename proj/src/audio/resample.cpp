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


#include "acvc/audio/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

namespace acvc::audio {

namespace {

constexpr double kZeroCrossings = 8.0;  // per side
constexpr std::int64_t kMaxPhaseTable = 4096;

double windowed_sinc(double d, double cutoff, double half) {
  if (std::fabs(d) >= half) return 0.0;
  double x = cutoff * d;
  double s = x == 0.0 ? 1.0
                      : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  double w = 0.5 * (1.0 + std::cos(std::numbers::pi * d / half));
  return cutoff * s * w;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0) {
    throw AudioError("target rate must be positive, got " +
                     std::to_string(target_rate));
  }
  if (audio.sample_rate <= 0) throw AudioError("source rate must be positive");
  if (target_rate == audio.sample_rate) return audio;

  const std::int64_t g = std::gcd(audio.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = audio.sample_rate / g;
  const double cutoff =
      std::min(1.0, static_cast<double>(target_rate) / audio.sample_rate);
  const int half = static_cast<int>(std::ceil(kZeroCrossings / cutoff));
  const int taps = 2 * half;

  const auto n_in = static_cast<std::int64_t>(audio.samples.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * target_rate / audio.sample_rate));

  // Coefficient j of phase p multiplies x[i - half + 1 + j] for output
  // position i + p / up.
  auto coeff = [&](std::int64_t p, int j) {
    double d = static_cast<double>(p) / static_cast<double>(up) + half - 1 - j;
    return windowed_sinc(d, cutoff, half);
  };
  std::vector<double> table;
  if (up <= kMaxPhaseTable) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (std::int64_t p = 0; p < up; ++p) {
      for (int j = 0; j < taps; ++j) table[p * taps + j] = coeff(p, j);
    }
  }

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t pos = m * down;
    const std::int64_t i = pos / up;
    const std::int64_t p = pos % up;
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) {
      std::int64_t k = i - half + 1 + j;
      if (k < 0 || k >= n_in) continue;
      double c = table.empty() ? coeff(p, j) : table[p * taps + j];
      acc += c * audio.samples[static_cast<std::size_t>(k)];
    }
    out.samples[static_cast<std::size_t>(m)] =
        static_cast<float>(std::clamp(acc, -1.0, 1.0));
  }
  return out;
}

}  // namespace acvc::audio
