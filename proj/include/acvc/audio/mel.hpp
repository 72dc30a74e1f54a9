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

#include <vector>

#include "acvc/audio/types.hpp"

namespace acvc::audio {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular HTK-scale filters, unnormalized, row-major [n_mels x n_bins].
std::vector<double> mel_filterbank(const DspConfig& cfg);

// log(max(filterbank * |STFT|^2, log_floor)) on the centered frame grid.
MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const DspConfig& cfg);

}  // namespace acvc::audio
