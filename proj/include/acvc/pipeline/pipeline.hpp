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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "acvc/audio/types.hpp"
#include "acvc/models/models.hpp"

namespace acvc::pipeline {

class PipelineError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PitchPolicy {
  enum class Kind { kPassthrough, kFlat, kScale };
  Kind kind = Kind::kPassthrough;
  double value = 0.0;  // Hz for kFlat, factor for kScale

  static PitchPolicy passthrough() { return {}; }
  static PitchPolicy flat(double f0);
  static PitchPolicy scale(double k);
  // Voiced frames only; unvoiced frames stay at zero.
  audio::PitchContour apply(const audio::PitchContour& contour) const;
};

std::string to_string(const PitchPolicy& policy);
// "passthrough", "flat:<hz>" or "scale:<k>".
PitchPolicy parse_pitch_policy(const std::string& text);

struct VoiceProfile {
  models::Embedding accent, gender, speaker;
  PitchPolicy pitch;
  // Throws PipelineError on wrong embedding kinds or sizes.
  void validate() const;
};

// Accent and gender come from the AE/GE network (zeros for an ablation
// bundle, which ignores them), speaker from the SE network.
VoiceProfile profile_from_audio(const models::ModelBundle& bundle,
                                const audio::AudioBuffer& sample);
std::size_t min_profile_samples(const models::ModelBundle& bundle);

// The three conversion stages, shared by convert and the streaming engine.
struct Features {
  audio::MelSpectrogram mel;
  audio::PitchContour pitch;
  std::size_t samples = 0;
};
Features analyze(const models::ModelBundle& bundle, const audio::AudioBuffer& audio);
audio::MelSpectrogram predict_mel(const models::ModelBundle& bundle,
                                  const Features& features,
                                  const VoiceProfile& profile);
// Vocodes and trims to at most `samples`.
audio::AudioBuffer render(const models::ModelBundle& bundle,
                          const audio::MelSpectrogram& mel, std::size_t samples);

// Output length is min(vocoded length, input length), where the vocoded
// length is hop * (4 ceil(T / 4) - 1) for T input frames.
audio::AudioBuffer convert(const models::ModelBundle& bundle,
                           const audio::AudioBuffer& audio,
                           const std::optional<VoiceProfile>& profile = std::nullopt);

// Throws PipelineError when a network is missing or the bundle's sizes do
// not fit its vocoder geometry.
void check_bundle(const models::ModelBundle& bundle);

struct LatencyReport {
  std::size_t iterations = 0;
  std::vector<double> latencies_ms;
  double mean_ms = 0.0, p50_ms = 0.0, p95_ms = 0.0;
  double audio_seconds = 0.0;  // total over all iterations
  double wall_seconds = 0.0;
  double rtfx = 0.0;           // audio_seconds / wall_seconds
};

// Nearest-rank percentile of an unsorted sample, p in (0, 100].
double percentile(std::vector<double> values, double p);
LatencyReport summarize(std::vector<double> latencies_ms, double audio_seconds,
                        double wall_seconds);

enum class ProfileSource { kEnrollment, kFirstChunk };

struct StreamConfig {
  double chunk_seconds = 0.2;
  std::size_t left_context_frames = 8;
  ProfileSource profile_source = ProfileSource::kFirstChunk;
  void validate(const audio::DspConfig& dsp) const;
};

struct StreamResult {
  std::vector<audio::AudioBuffer> chunks;
  LatencyReport report;  // one latency per chunk, wall = whole stream
  VoiceProfile profile;
};

// Consecutive chunks of chunk_seconds; a tail shorter than one hop is merged
// into the preceding chunk.
std::vector<audio::AudioBuffer> split_chunks(const audio::AudioBuffer& audio,
                                             const StreamConfig& cfg,
                                             const audio::DspConfig& dsp);

// Ingest, model and vocoder stages run on their own threads joined by
// single-slot queues. Each chunk is converted with up to
// left_context_frames hops of preceding input prepended, whose output is
// dropped. `enrollment` is required for ProfileSource::kEnrollment.
StreamResult stream_convert(const models::ModelBundle& bundle,
                            const std::vector<audio::AudioBuffer>& chunks,
                            const StreamConfig& cfg,
                            const audio::AudioBuffer* enrollment = nullptr,
                            const std::optional<PitchPolicy>& pitch = std::nullopt);

struct BenchmarkReport {
  LatencyReport with_profile;  // profile extracted inside every iteration
  LatencyReport precomputed;   // profile extracted once beforehand
  double clip_seconds = 0.0;
};

// One discarded warmup call, then `iterations` timed conversions for each
// mode.
BenchmarkReport benchmark(const models::ModelBundle& bundle,
                          const audio::AudioBuffer& audio,
                          std::size_t iterations = 200);

}  // namespace acvc::pipeline
