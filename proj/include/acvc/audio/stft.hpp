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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "acvc/audio/types.hpp"

namespace acvc::audio {

// Real FFT of a fixed size backed by a shared plan cache. Each instance owns
// its work buffers, so separate instances may run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // in: n reals -> out: n/2 + 1 bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: in: n/2 + 1 bins -> out: n reals scaled by n.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_;
  void* spec_;
  void* plan_fwd_;
  void* plan_inv_;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Index into a signal of length n after reflect padding, extended
// periodically for offsets larger than the signal.
std::size_t reflect_index(long i, std::size_t n);

// Centered STFT: frame t is the Hann-windowed segment starting at
// t * hop - win / 2 of the reflect-padded signal. Returns frame-major
// [frame_count(n) x n_bins] complex bins.
std::vector<std::complex<double>> stft(std::span<const float> samples,
                                       const DspConfig& cfg);

// Weighted overlap-add inverse of a frame-major STFT with the center padding
// removed. Output length is (frames - 1) * hop.
std::vector<double> istft(std::span<const std::complex<double>> spec,
                          std::size_t frames, const DspConfig& cfg);

}  // namespace acvc::audio
