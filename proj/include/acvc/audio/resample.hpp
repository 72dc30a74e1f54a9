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

#include "acvc/audio/types.hpp"

namespace acvc::audio {

// Band-limited rate conversion with a Hann-windowed sinc kernel spanning 16
// zero crossings of the lower of the two Nyquist rates. Output length is
// round(n * target_rate / sample_rate). Equal rates return a copy.
AudioBuffer resample(const AudioBuffer& audio, int target_rate);

}  // namespace acvc::audio
