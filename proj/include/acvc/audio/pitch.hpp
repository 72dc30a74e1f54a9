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
#include <vector>

#include "acvc/audio/types.hpp"

namespace acvc::audio {

struct PitchConfig {
  double f0_min = 60.0;
  double f0_max = 400.0;
  std::size_t context_hops = 3;   // analysis window = context_hops * hop
  double voicing_threshold = 0.3;
  std::size_t median_width = 5;
  // Per-lag penalty that breaks near-ties in favour of the shorter period.
  double octave_bias = 0.1;
};

// Frame-wise NCCF estimate before smoothing, on the mel frame grid.
PitchContour estimate_raw_f0(const AudioBuffer& audio, const DspConfig& cfg,
                             const PitchConfig& pitch = {});

// Running median over f0 (zeros included) with a window that shrinks at the
// edges; voiced is recomputed as f0 > 0.
PitchContour smooth_contour(const PitchContour& raw, std::size_t width);

PitchContour extract_pitch(const AudioBuffer& audio, const DspConfig& cfg,
                           double f0_min = 60.0, double f0_max = 400.0);
PitchContour extract_pitch(const AudioBuffer& audio, const DspConfig& cfg,
                           const PitchConfig& pitch);

}  // namespace acvc::audio
