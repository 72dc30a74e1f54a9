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
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "acvc/audio/types.hpp"
#include "acvc/autodiff/tensor.hpp"
#include "acvc/models/error.hpp"
#include "acvc/models/vocoder.hpp"
#include "acvc/nn/blocks.hpp"
#include "acvc/nn/params.hpp"
#include "acvc/nn/preset.hpp"

namespace acvc::models {

enum class EmbeddingKind { kAccent, kGender, kSpeaker };
std::string to_string(EmbeddingKind kind);

struct Embedding {
  EmbeddingKind kind = EmbeddingKind::kAccent;
  ad::Tensor values;  // [192] accent/gender, [512] speaker
};

// Frame-major [T x n_mels] tensor from a mel spectrogram, and back.
ad::Tensor mel_tensor(const audio::MelSpectrogram& mel);
audio::MelSpectrogram to_mel(const ad::Tensor& frames,
                             const audio::DspConfig& cfg);

// Accent and gender embeddings: Jasper blocks feeding two parallel
// attentive-pooling decoders.
class AegeModel {
 public:
  struct Output {
    ad::Tensor accent_logits;  // [accent_classes]
    ad::Tensor gender_logits;  // [gender_classes]
    Embedding accent, gender;
  };

  AegeModel(const nn::BlockPreset& preset, std::uint64_t seed,
            nn::Precision precision);
  // mel: [T x n_mels]
  Output operator()(const ad::Tensor& mel,
                    const nn::ForwardContext& ctx = {}) const;
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

 private:
  nn::ParamStore store_;
  std::size_t n_mels_;
  nn::JasperStack jasper_;
  nn::AttentivePoolingDecoder accent_, gender_;
};

// Speaker embedding straight from the waveform: sinc band-pass front end,
// x-vector frame layers, statistics pooling, 512-d projection.
class SpeakerModel {
 public:
  SpeakerModel(const nn::BlockPreset& preset, std::uint64_t seed,
               nn::Precision precision);
  // Resamples to the front end's rate when needed.
  Embedding operator()(const audio::AudioBuffer& audio,
                       const nn::ForwardContext& ctx = {}) const;
  // samples: [N] already at sample_rate().
  Embedding embed(const ad::Tensor& samples,
                  const nn::ForwardContext& ctx = {}) const;
  int sample_rate() const { return sinc_.config().sample_rate; }
  // Shortest input (in samples at sample_rate()) the layers accept.
  std::size_t min_samples() const;
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

 private:
  nn::ParamStore store_;
  nn::SincConv sinc_;
  nn::XVectorStack xvector_;
};

struct PhoneticFeatures {
  ad::Tensor frames;     // [T' x d] accent-encoder output
  ad::Tensor log_probs;  // [T' x (vocab + 1)], blank last
};

// Speech to phonetic tokens: 4x subsampling, conformer encoder, accent
// conditioning, FFT accent encoder, pointwise conv decoder, log-softmax.
// The ablation variant has neither the conditioning nor the accent encoder.
class StpModel {
 public:
  StpModel(const nn::BlockPreset& preset, std::uint64_t seed,
           nn::Precision precision, bool ablation = false);
  // accent is ignored (and may be null) in ablation mode.
  PhoneticFeatures operator()(const ad::Tensor& mel, const Embedding* accent,
                              const nn::ForwardContext& ctx = {}) const;
  static std::size_t output_frames(std::size_t mel_frames) {
    return nn::Subsample4::output_length(mel_frames);
  }
  std::size_t feature_dim() const { return d_model_; }
  bool ablation() const { return ablation_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

 private:
  nn::ParamStore store_;
  bool ablation_;
  std::size_t n_mels_, d_model_, classes_, accent_dim_;
  nn::Subsample4 subsample_;
  std::vector<nn::ConformerBlock> conformer_;
  nn::Condition accent_condition_;
  nn::FftStack accent_encoder_;
  nn::Conv1d decoder_;
};

struct StsInputs {
  const ad::Tensor* frames = nullptr;  // [T' x stp feature dim]
  const Embedding* accent = nullptr;   // unused in ablation mode
  const Embedding* gender = nullptr;   // unused in ablation mode
  const Embedding* speaker = nullptr;
  const audio::PitchContour* pitch = nullptr;  // ceil(size / 4) == T'
};

// Phonetic frames to mel: 4x upsampling, FFT encoder, then an accent branch
// (conditioning + FFT stack) summed with a speaker branch (pitch, speaker and
// gender projections + FFT stack), FFT decoder and an 80-band projection.
// Output is [4 T' x n_mels].
class StsModel {
 public:
  StsModel(const nn::BlockPreset& preset, std::size_t phonetic_dim,
           std::uint64_t seed, nn::Precision precision, bool ablation = false);
  ad::Tensor operator()(const StsInputs& in,
                        const nn::ForwardContext& ctx = {}) const;
  // [L x 2] rows of (f0 / kF0Scale, voiced), zero-padded to `frames`.
  static ad::Tensor pitch_features(const audio::PitchContour& pitch,
                                   std::size_t frames);
  static constexpr double kF0Scale = 400.0;
  bool ablation() const { return ablation_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

 private:
  nn::ParamStore store_;
  bool ablation_;
  std::size_t phonetic_dim_, d_model_, n_mels_, accent_dim_, speaker_dim_;
  nn::Upsample4 upsample_;
  nn::FftStack encoder_;
  nn::Condition accent_condition_;
  nn::FftStack accent_encoder_;
  nn::Linear pitch_projection_;
  nn::Condition speaker_condition_, gender_condition_;
  nn::FftStack speaker_encoder_;
  nn::FftStack decoder_;
  nn::Linear output_;
};

// All networks of one conversion system. In ablation mode aege is null.
struct ModelBundle {
  nn::BlockPreset preset;
  bool ablation = false;
  std::unique_ptr<AegeModel> aege;
  std::unique_ptr<SpeakerModel> se;
  std::unique_ptr<StpModel> stp;
  std::unique_ptr<StsModel> sts;
  std::shared_ptr<const Vocoder> vocoder;
  // Stages completed so far ("aege", "se", ...); persisted with checkpoints.
  std::set<std::string> trained;

  static ModelBundle create(const nn::BlockPreset& preset, std::uint64_t seed,
                            bool ablation = false,
                            nn::Precision precision = nn::Precision::kFloat32);

  // (name, store) for every present network, in pipeline order.
  std::vector<std::pair<std::string, nn::ParamStore*>> stores();
  std::vector<std::pair<std::string, const nn::ParamStore*>> stores() const;
  void set_frozen(bool frozen);
};

struct ModelCount {
  std::string name;
  std::size_t total = 0;
  std::size_t trainable = 0;
};

struct ParameterReport {
  std::vector<ModelCount> models;  // aege, se, stp, sts, vocoder
  ModelCount full_sts;             // aege + se + stp + sts
};

ParameterReport count_parameters(const ModelBundle& bundle);

}  // namespace acvc::models
