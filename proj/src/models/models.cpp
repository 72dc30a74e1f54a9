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


#include "acvc/models/models.hpp"

#include <string>

#include "acvc/audio/resample.hpp"
#include "acvc/autodiff/ops.hpp"
#include "acvc/nn/layers.hpp"

namespace acvc::models {

using ad::Tensor;

namespace {

void check_mel(const Tensor& mel, std::size_t n_mels, const char* who) {
  if (mel.rank() != 2 || mel.dim(1) != n_mels || mel.dim(0) == 0) {
    throw ModelError(std::string(who) + " expects a non-empty [T x " +
                     std::to_string(n_mels) + "] mel, got " +
                     (mel.defined() ? ad::shape_string(mel.shape())
                                    : std::string("nothing")));
  }
}

const Embedding& require(const Embedding* e, EmbeddingKind kind,
                         std::size_t dim, const char* who) {
  if (e == nullptr) {
    throw ModelError(std::string(who) + " needs a " + to_string(kind) +
                     " embedding");
  }
  if (e->kind != kind) {
    throw ModelError(std::string(who) + " expects a " + to_string(kind) +
                     " embedding, got " + to_string(e->kind));
  }
  if (e->values.numel() != dim) {
    throw ModelError(std::string(who) + ": " + to_string(kind) +
                     " embedding must have " + std::to_string(dim) +
                     " values, got " + std::to_string(e->values.numel()));
  }
  return *e;
}

Tensor with_positions(const Tensor& x) {
  return ad::add(x, nn::positional_encoding(x.dim(0), x.dim(1)));
}

}  // namespace

std::string to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kAccent: return "accent";
    case EmbeddingKind::kGender: return "gender";
    case EmbeddingKind::kSpeaker: return "speaker";
  }
  return "unknown";
}

Tensor mel_tensor(const audio::MelSpectrogram& mel) {
  return Tensor::from_vector({mel.frames, mel.n_mels}, mel.frame_major());
}

audio::MelSpectrogram to_mel(const Tensor& frames, const audio::DspConfig& cfg) {
  if (frames.rank() != 2 || frames.dim(1) != cfg.n_mels) {
    throw ModelError("to_mel expects [T x " + std::to_string(cfg.n_mels) +
                     "], got " + ad::shape_string(frames.shape()));
  }
  return audio::MelSpectrogram::from_frame_major(frames.to_vector(),
                                                 frames.dim(0), cfg);
}

// --- AE/GE ----------------------------------------------------------------

AegeModel::AegeModel(const nn::BlockPreset& preset, std::uint64_t seed,
                     nn::Precision precision)
    : store_(seed, precision),
      n_mels_(preset.n_mels),
      jasper_(store_, "jasper", preset.n_mels, preset.jasper),
      accent_(store_, "accent_decoder", jasper_.out_channels(), preset.decoder,
              preset.accent_classes),
      gender_(store_, "gender_decoder", jasper_.out_channels(), preset.decoder,
              preset.gender_classes) {}

AegeModel::Output AegeModel::operator()(const Tensor& mel,
                                        const nn::ForwardContext& ctx) const {
  check_mel(mel, n_mels_, "aege");
  Tensor h = nn::to_frames(jasper_(nn::to_channels(mel), ctx));
  auto a = accent_(h);
  auto g = gender_(h);
  return {a.logits, g.logits, {EmbeddingKind::kAccent, a.embedding},
          {EmbeddingKind::kGender, g.embedding}};
}

// --- SE -------------------------------------------------------------------

SpeakerModel::SpeakerModel(const nn::BlockPreset& preset, std::uint64_t seed,
                           nn::Precision precision)
    : store_(seed, precision),
      sinc_(store_, "sinc", preset.sinc),
      xvector_(store_, "xvector", preset.sinc.channels, preset.xvector) {}

std::size_t SpeakerModel::min_samples() const {
  return sinc_.config().kernel +
         (nn::XVectorStack::receptive_field() - 1) * sinc_.config().stride;
}

Embedding SpeakerModel::operator()(const audio::AudioBuffer& audio,
                                   const nn::ForwardContext& ctx) const {
  audio.validate();
  audio::AudioBuffer at_rate = audio.sample_rate == sample_rate()
                                   ? audio
                                   : audio::resample(audio, sample_rate());
  std::vector<double> v(at_rate.samples.begin(), at_rate.samples.end());
  std::size_t n = v.size();
  return embed(Tensor::from_vector({n}, std::move(v)), ctx);
}

Embedding SpeakerModel::embed(const Tensor& samples,
                              const nn::ForwardContext& ctx) const {
  if (samples.rank() != 1 || samples.numel() < min_samples()) {
    throw ModelError("speaker model needs at least " +
                     std::to_string(min_samples()) + " samples at " +
                     std::to_string(sample_rate()) + " Hz, got " +
                     ad::shape_string(samples.shape()));
  }
  return {EmbeddingKind::kSpeaker, xvector_(sinc_(samples), ctx)};
}

// --- STP ------------------------------------------------------------------

StpModel::StpModel(const nn::BlockPreset& preset, std::uint64_t seed,
                   nn::Precision precision, bool ablation)
    : store_(seed, precision),
      ablation_(ablation),
      n_mels_(preset.n_mels),
      d_model_(preset.conformer.d_model),
      classes_(preset.token_classes()),
      accent_dim_(preset.accent_dim()),
      subsample_(store_, "subsample", preset.n_mels, preset.conformer.d_model),
      accent_condition_(ablation ? nn::Condition()
                                 : nn::Condition(store_, "accent_condition",
                                                 preset.accent_dim(),
                                                 preset.conformer.d_model)),
      accent_encoder_(ablation ? nn::FftStack()
                               : nn::FftStack(store_, "accent_encoder",
                                              preset.stp_accent,
                                              preset.stp_accent_stacks)),
      decoder_(store_, "decoder", preset.conformer.d_model,
               preset.token_classes(), 1) {
  if (preset.stp_accent.d_model != preset.conformer.d_model) {
    throw ModelError("stp accent encoder width must match the conformer width");
  }
  for (std::size_t i = 0; i < preset.conformer.layers; ++i) {
    conformer_.emplace_back(store_, "conformer." + std::to_string(i),
                            preset.conformer);
  }
}

PhoneticFeatures StpModel::operator()(const Tensor& mel, const Embedding* accent,
                                      const nn::ForwardContext& ctx) const {
  check_mel(mel, n_mels_, "stp");
  Tensor h = with_positions(subsample_(mel));
  for (const auto& block : conformer_) h = block(h, ctx);
  if (!ablation_) {
    const Embedding& a = require(accent, EmbeddingKind::kAccent,
                                 accent_dim_, "stp");
    h = accent_encoder_(accent_condition_(h, a.values), ctx);
  }
  Tensor logits = nn::to_frames(decoder_(nn::to_channels(h)));
  return {h, ad::log_softmax(logits, 1)};
}

// --- STS ------------------------------------------------------------------

StsModel::StsModel(const nn::BlockPreset& preset, std::size_t phonetic_dim,
                   std::uint64_t seed, nn::Precision precision, bool ablation)
    : store_(seed, precision),
      ablation_(ablation),
      phonetic_dim_(phonetic_dim),
      d_model_(preset.sts.d_model),
      n_mels_(preset.n_mels),
      accent_dim_(preset.accent_dim()),
      speaker_dim_(preset.speaker_dim()),
      upsample_(store_, "upsample", phonetic_dim, preset.sts.d_model),
      encoder_(store_, "encoder", preset.sts, preset.sts_stacks.encoder),
      accent_condition_(ablation ? nn::Condition()
                                 : nn::Condition(store_, "accent_condition",
                                                 preset.accent_dim(),
                                                 preset.sts.d_model)),
      accent_encoder_(ablation ? nn::FftStack()
                               : nn::FftStack(store_, "accent_encoder",
                                              preset.sts,
                                              preset.sts_stacks.accent)),
      pitch_projection_(store_, "pitch_projection", 2, preset.sts.d_model),
      speaker_condition_(store_, "speaker_condition", preset.speaker_dim(),
                         preset.sts.d_model),
      gender_condition_(ablation ? nn::Condition()
                                 : nn::Condition(store_, "gender_condition",
                                                 preset.accent_dim(),
                                                 preset.sts.d_model)),
      speaker_encoder_(store_, "speaker_encoder", preset.sts,
                       preset.sts_stacks.speaker),
      decoder_(store_, "decoder", preset.sts, preset.sts_stacks.decoder),
      output_(store_, "output", preset.sts.d_model, preset.n_mels) {}

Tensor StsModel::pitch_features(const audio::PitchContour& pitch,
                                std::size_t frames) {
  if (pitch.f0.size() != pitch.voiced.size() || pitch.size() > frames) {
    throw ModelError("pitch contour of " + std::to_string(pitch.size()) +
                     " frames does not fit a " + std::to_string(frames) +
                     "-frame grid");
  }
  std::vector<double> v(frames * 2, 0.0);
  for (std::size_t t = 0; t < pitch.size(); ++t) {
    v[2 * t] = pitch.f0[t] / kF0Scale;
    v[2 * t + 1] = pitch.voiced[t] ? 1.0 : 0.0;
  }
  return Tensor::from_vector({frames, 2}, std::move(v));
}

Tensor StsModel::operator()(const StsInputs& in,
                            const nn::ForwardContext& ctx) const {
  if (in.frames == nullptr || in.frames->rank() != 2 ||
      in.frames->dim(1) != phonetic_dim_ || in.frames->dim(0) == 0) {
    throw ModelError("sts expects non-empty phonetic frames [T' x " +
                     std::to_string(phonetic_dim_) + "]");
  }
  const std::size_t tp = in.frames->dim(0);
  if (in.pitch == nullptr || (in.pitch->size() + 3) / 4 != tp) {
    throw ModelError(
        "sts pitch grid of " +
        std::to_string(in.pitch ? in.pitch->size() : 0) +
        " frames does not match " + std::to_string(tp) + " phonetic frames");
  }
  const std::size_t frames = 4 * tp;
  const Embedding& spk = require(in.speaker, EmbeddingKind::kSpeaker,
                                 speaker_dim_, "sts");
  Tensor e = encoder_(with_positions(upsample_(*in.frames)), ctx);
  Tensor branch_b = ad::add(pitch_projection_(pitch_features(*in.pitch, frames)),
                            speaker_condition_.offset(spk.values));
  Tensor branch_a = e;
  if (!ablation_) {
    const Embedding& acc =
        require(in.accent, EmbeddingKind::kAccent, accent_dim_, "sts");
    const Embedding& gen =
        require(in.gender, EmbeddingKind::kGender, accent_dim_, "sts");
    branch_a = accent_encoder_(accent_condition_(e, acc.values), ctx);
    branch_b = ad::add(branch_b, gender_condition_.offset(gen.values));
  }
  Tensor h = ad::add(branch_a, speaker_encoder_(branch_b, ctx));
  return output_(decoder_(with_positions(h), ctx));
}

// --- bundle ---------------------------------------------------------------

ModelBundle ModelBundle::create(const nn::BlockPreset& preset,
                                std::uint64_t seed, bool ablation,
                                nn::Precision precision) {
  ModelBundle b;
  b.preset = preset;
  b.ablation = ablation;
  if (!ablation) b.aege = std::make_unique<AegeModel>(preset, seed + 1, precision);
  b.se = std::make_unique<SpeakerModel>(preset, seed + 2, precision);
  b.stp = std::make_unique<StpModel>(preset, seed + 3, precision, ablation);
  b.sts = std::make_unique<StsModel>(preset, b.stp->feature_dim(), seed + 4,
                                     precision, ablation);
  b.vocoder = std::make_shared<GriffinLim>();
  return b;
}

std::vector<std::pair<std::string, nn::ParamStore*>> ModelBundle::stores() {
  std::vector<std::pair<std::string, nn::ParamStore*>> out;
  if (aege) out.emplace_back("aege", &aege->params());
  if (se) out.emplace_back("se", &se->params());
  if (stp) out.emplace_back("stp", &stp->params());
  if (sts) out.emplace_back("sts", &sts->params());
  return out;
}

std::vector<std::pair<std::string, const nn::ParamStore*>> ModelBundle::stores()
    const {
  std::vector<std::pair<std::string, const nn::ParamStore*>> out;
  for (auto& [name, store] : const_cast<ModelBundle*>(this)->stores()) {
    out.emplace_back(name, store);
  }
  return out;
}

void ModelBundle::set_frozen(bool frozen) {
  for (auto& [name, store] : stores()) store->set_frozen(frozen);
}

ParameterReport count_parameters(const ModelBundle& bundle) {
  ParameterReport r;
  auto add = [&r](const std::string& name, const nn::ParamStore* s) {
    ModelCount c{name, s ? s->parameter_count() : 0,
                 s ? s->trainable_count() : 0};
    r.full_sts.total += c.total;
    r.full_sts.trainable += c.trainable;
    r.models.push_back(c);
  };
  r.full_sts.name = "full_sts";
  add("aege", bundle.aege ? &bundle.aege->params() : nullptr);
  add("se", bundle.se ? &bundle.se->params() : nullptr);
  add("stp", bundle.stp ? &bundle.stp->params() : nullptr);
  add("sts", bundle.sts ? &bundle.sts->params() : nullptr);
  std::size_t v = bundle.vocoder ? bundle.vocoder->parameter_count() : 0;
  r.models.push_back({"vocoder", v, v});
  return r;
}

}  // namespace acvc::models
