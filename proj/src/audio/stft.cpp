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


#include "acvc/audio/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace acvc::audio {

namespace {

struct Plans {
  fftw_plan forward;
  fftw_plan inverse;
};

// Planning is not thread-safe in FFTW; execution with the new-array interface
// is. Plans live for the process lifetime.
Plans plans_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, Plans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw AudioError("FFT size must be at least 2");
  Plans p = plans_for(n);
  plan_fwd_ = p.forward;
  plan_inv_ = p.inverse;
  real_ = fftw_alloc_real(n);
  spec_ = fftw_alloc_complex(n / 2 + 1);
}

RealFft::~RealFft() {
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.begin() + static_cast<long>(n_), real_);
  auto* spec = static_cast<fftw_complex*>(spec_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), real_, spec);
  for (std::size_t k = 0; k <= n_ / 2; ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k <= n_ / 2; ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_), spec, real_);
  std::copy(real_, real_ + n_, out.begin());
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long>(n) ? m : period - m);
}

std::vector<std::complex<double>> stft(std::span<const float> samples,
                                       const DspConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw AudioError("stft of empty signal");
  const std::size_t n = samples.size();
  const std::size_t win = cfg.win_size;
  const std::size_t bins = cfg.n_bins();
  const std::size_t frames = cfg.frame_count(n);
  const long pad = static_cast<long>(win / 2);
  const std::vector<double> window = hann_window(win);

  RealFft fft(win);
  std::vector<double> frame(win);
  std::vector<std::complex<double>> out(frames * bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const long start = static_cast<long>(t * cfg.hop_size) - pad;
    for (std::size_t j = 0; j < win; ++j) {
      frame[j] = window[j] *
                 samples[reflect_index(start + static_cast<long>(j), n)];
    }
    fft.forward(frame, std::span(out).subspan(t * bins, bins));
  }
  return out;
}

std::vector<double> istft(std::span<const std::complex<double>> spec,
                          std::size_t frames, const DspConfig& cfg) {
  cfg.validate();
  const std::size_t win = cfg.win_size;
  const std::size_t bins = cfg.n_bins();
  if (spec.size() != frames * bins) {
    throw AudioError("istft: spectrum has " + std::to_string(spec.size()) +
                     " bins, expected " + std::to_string(frames * bins));
  }
  if (frames == 0) return {};
  const std::size_t hop = cfg.hop_size;
  const std::size_t pad = win / 2;
  const std::size_t padded_len = (frames - 1) * hop + win;
  const std::vector<double> window = hann_window(win);

  std::vector<double> acc(padded_len, 0.0), norm(padded_len, 0.0);
  RealFft fft(win);
  std::vector<double> frame(win);
  const double scale = 1.0 / static_cast<double>(win);
  for (std::size_t t = 0; t < frames; ++t) {
    fft.inverse(spec.subspan(t * bins, bins), frame);
    for (std::size_t j = 0; j < win; ++j) {
      acc[t * hop + j] += window[j] * frame[j] * scale;
      norm[t * hop + j] += window[j] * window[j];
    }
  }
  const std::size_t out_len = (frames - 1) * hop;
  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double d = norm[i + pad];
    if (d > 1e-8) out[i] = acc[i + pad] / d;
  }
  return out;
}

}  // namespace acvc::audio
