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
#include <cstdint>
#include <string>
#include <vector>

#include "acvc/audio/types.hpp"
#include "acvc/io/manifest.hpp"

namespace acvc::io {

struct CorpusSpec {
  std::size_t speakers = 2;
  std::size_t accents = 2;
  std::size_t utterances = 2;  // per (speaker, accent) pair
  int sample_rate = 22050;
};

struct SyntheticUtterance {
  ManifestRecord record;  // audio_filepath is the bare file name
  audio::AudioBuffer audio;
};

// Formant synthesis. A speaker fixes the glottal F0 and a resonance scale;
// an accent class shifts the second formant and stretches segment
// durations; transcripts come from an "{adjective} {noun}" grammar and every
// letter is rendered as a short formant segment, spaces as pauses.
std::vector<SyntheticUtterance> synthesize_corpus(const CorpusSpec& spec,
                                                  std::uint64_t seed);

// Writes PCM16 WAVs and manifest.jsonl into `dir` (created if needed) and
// returns the records with paths relative to `dir`.
std::vector<ManifestRecord> generate_synthetic_corpus(const CorpusSpec& spec,
                                                      std::uint64_t seed,
                                                      const std::string& dir);

// Nominal resonances for one utterance's speaker/accent pair.
struct VoiceParams {
  double f0 = 120.0;
  double formant_scale = 1.0;
  double f2_shift = 0.0;       // Hz
  double duration_scale = 1.0;
};
VoiceParams voice_params(std::size_t speaker, std::size_t accent);

}  // namespace acvc::io
