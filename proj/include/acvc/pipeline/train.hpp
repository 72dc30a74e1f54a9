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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "acvc/audio/types.hpp"
#include "acvc/autodiff/optimizer.hpp"
#include "acvc/io/manifest.hpp"
#include "acvc/models/models.hpp"
#include "acvc/text/text.hpp"

namespace acvc::pipeline {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { kAege, kSe, kStp, kSts, kAblation };
std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);
// Stages a stage depends on, which must already be in bundle.trained.
std::vector<Stage> prerequisites(Stage stage);

struct TrainingExample {
  io::ManifestRecord record;
  audio::AudioBuffer audio;
  audio::MelSpectrogram mel;
  audio::PitchContour pitch;
  std::vector<std::size_t> tokens;  // normalized transcript
  std::size_t speaker = 0;          // index into TrainingSet::speakers
};

struct TrainingSet {
  std::vector<TrainingExample> examples;
  std::vector<std::string> speakers;  // distinct ids in first-seen order
};

// Loads each record's audio (paths relative to `base_dir` unless absolute)
// and precomputes features.
TrainingSet load_training_set(const std::vector<io::ManifestRecord>& records,
                              const std::string& base_dir,
                              const audio::DspConfig& dsp,
                              const text::Tokenizer& tokenizer);
TrainingSet make_training_set(std::vector<io::ManifestRecord> records,
                              std::vector<audio::AudioBuffer> audio,
                              const audio::DspConfig& dsp,
                              const text::Tokenizer& tokenizer);

struct TrainLogEntry {
  std::size_t step = 0;
  Stage stage = Stage::kAege;
  double loss = 0.0;  // full-batch mean before the update
  double lr = 0.0;
};
// One JSON object: {"step":..,"stage":..,"loss":..,"lr":..}.
std::string to_json_line(const TrainLogEntry& entry);

struct TrainConfig {
  Stage stage = Stage::kAege;
  std::size_t steps = 0;  // 0 selects default_steps(stage)
  std::optional<ad::OptimizerConfig> optimizer;  // default_optimizer otherwise
  std::uint64_t seed = 0;
  std::optional<double> dropout;  // preset value otherwise
  std::function<void(const TrainLogEntry&)> on_step;
};

std::size_t default_steps(Stage stage);
// SGD with momentum for aege, AdamW for the rest; cosine annealing over
// `steps`.
ad::OptimizerConfig default_optimizer(Stage stage, std::size_t steps);

struct TrainResult {
  Stage stage = Stage::kAege;
  std::vector<TrainLogEntry> log;
  double initial_loss = 0.0;
  double final_loss = 0.0;  // full-batch loss after the last update
  // Sum of gradient norms over every frozen network after a backward pass
  // routed through them.
  double frozen_grad_norm = 0.0;
  std::vector<std::string> frozen;
};

// Full-batch training of one stage. Every network other than the trained
// ones is frozen; on success the stage is added to bundle.trained and the
// whole bundle is left frozen.
TrainResult train(models::ModelBundle& bundle, const TrainingSet& data,
                  const TrainConfig& cfg);

}  // namespace acvc::pipeline
