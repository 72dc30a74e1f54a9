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


#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "acvc/audio/mel.hpp"
#include "acvc/audio/pitch.hpp"
#include "acvc/autodiff/tensor.hpp"
#include "acvc/pipeline/pipeline.hpp"

namespace acvc::pipeline {

namespace {

const audio::DspConfig& dsp_of(const models::ModelBundle& bundle) {
  return bundle.vocoder->config();
}

void check_input(const models::ModelBundle& bundle, const audio::AudioBuffer& audio) {
  if (audio.empty()) throw audio::AudioError("empty audio");
  audio.validate();
  if (audio.sample_rate != dsp_of(bundle).sample_rate) {
    throw audio::AudioError("audio is " + std::to_string(audio.sample_rate) +
                            " Hz, the bundle expects " +
                            std::to_string(dsp_of(bundle).sample_rate) + " Hz");
  }
}

double parse_positive(const std::string& text, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v) ||
      v <= 0.0) {
    throw PipelineError(what + " must be a positive number, got '" + text + "'");
  }
  return v;
}

}  // namespace

PitchPolicy PitchPolicy::flat(double f0) {
  if (!(f0 > 0.0) || !std::isfinite(f0)) {
    throw PipelineError("flat pitch must be a positive frequency");
  }
  return {Kind::kFlat, f0};
}

PitchPolicy PitchPolicy::scale(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw PipelineError("pitch scale factor must be positive");
  }
  return {Kind::kScale, k};
}

audio::PitchContour PitchPolicy::apply(const audio::PitchContour& contour) const {
  audio::PitchContour out = contour;
  if (kind == Kind::kPassthrough) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.voiced[i]) continue;
    out.f0[i] = kind == Kind::kFlat ? value : out.f0[i] * value;
  }
  return out;
}

std::string to_string(const PitchPolicy& policy) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  switch (policy.kind) {
    case PitchPolicy::Kind::kFlat:
      return "flat:" + num(policy.value);
    case PitchPolicy::Kind::kScale:
      return "scale:" + num(policy.value);
    default:
      return "passthrough";
  }
}

PitchPolicy parse_pitch_policy(const std::string& text) {
  if (text == "passthrough") return PitchPolicy::passthrough();
  if (text.rfind("flat:", 0) == 0) {
    return PitchPolicy::flat(parse_positive(text.substr(5), "flat pitch"));
  }
  if (text.rfind("scale:", 0) == 0) {
    return PitchPolicy::scale(parse_positive(text.substr(6), "pitch scale"));
  }
  throw PipelineError("unknown pitch policy '" + text +
                      "' (expected passthrough, flat:<hz> or scale:<k>)");
}

void VoiceProfile::validate() const {
  auto check = [](const models::Embedding& e, models::EmbeddingKind kind,
                  const char* role) {
    if (e.kind != kind) {
      throw PipelineError(std::string(role) + " slot holds a " +
                          models::to_string(e.kind) + " embedding");
    }
    if (e.values.numel() == 0) {
      throw PipelineError(std::string(role) + " embedding is empty");
    }
  };
  check(accent, models::EmbeddingKind::kAccent, "accent");
  check(gender, models::EmbeddingKind::kGender, "gender");
  check(speaker, models::EmbeddingKind::kSpeaker, "speaker");
  if (pitch.kind != PitchPolicy::Kind::kPassthrough &&
      (!(pitch.value > 0.0) || !std::isfinite(pitch.value))) {
    throw PipelineError("pitch policy value must be positive");
  }
}

void check_bundle(const models::ModelBundle& bundle) {
  if (!bundle.se || !bundle.stp || !bundle.sts || !bundle.vocoder) {
    throw PipelineError("bundle is missing a network");
  }
  if (!bundle.ablation && !bundle.aege) {
    throw PipelineError("bundle is missing the accent/gender network");
  }
  if (bundle.stp->ablation() != bundle.ablation ||
      bundle.sts->ablation() != bundle.ablation) {
    throw PipelineError("bundle mixes ablation and full networks");
  }
  if (dsp_of(bundle).n_mels != bundle.preset.n_mels) {
    throw PipelineError("vocoder expects " + std::to_string(dsp_of(bundle).n_mels) +
                        " mel bands, preset " + bundle.preset.name + " has " +
                        std::to_string(bundle.preset.n_mels));
  }
}

std::size_t min_profile_samples(const models::ModelBundle& bundle) {
  check_bundle(bundle);
  const double ratio = static_cast<double>(dsp_of(bundle).sample_rate) /
                       bundle.se->sample_rate();
  return static_cast<std::size_t>(
             std::ceil(static_cast<double>(bundle.se->min_samples()) * ratio)) + 1;
}

VoiceProfile profile_from_audio(const models::ModelBundle& bundle,
                                const audio::AudioBuffer& sample) {
  check_bundle(bundle);
  check_input(bundle, sample);
  if (sample.size() < min_profile_samples(bundle)) {
    throw PipelineError("profile sample too short: " + std::to_string(sample.size()) +
                        " samples, need at least " +
                        std::to_string(min_profile_samples(bundle)));
  }
  ad::NoGradGuard no_grad;
  VoiceProfile p;
  if (bundle.aege) {
    auto mel = audio::mel_spectrogram(sample, dsp_of(bundle));
    auto out = (*bundle.aege)(models::mel_tensor(mel));
    p.accent = out.accent;
    p.gender = out.gender;
  } else {
    const std::size_t dim = bundle.preset.decoder.embedding_dim;
    p.accent = {models::EmbeddingKind::kAccent, ad::Tensor::zeros({dim})};
    p.gender = {models::EmbeddingKind::kGender, ad::Tensor::zeros({dim})};
  }
  p.speaker = (*bundle.se)(sample);
  return p;
}

Features analyze(const models::ModelBundle& bundle, const audio::AudioBuffer& audio) {
  check_input(bundle, audio);
  Features f;
  f.mel = audio::mel_spectrogram(audio, dsp_of(bundle));
  f.pitch = audio::extract_pitch(audio, dsp_of(bundle));
  f.samples = audio.size();
  return f;
}

audio::MelSpectrogram predict_mel(const models::ModelBundle& bundle,
                                  const Features& features,
                                  const VoiceProfile& profile) {
  check_bundle(bundle);
  profile.validate();
  ad::NoGradGuard no_grad;
  auto phonetic = (*bundle.stp)(models::mel_tensor(features.mel), &profile.accent);
  audio::PitchContour pitch = profile.pitch.apply(features.pitch);
  models::StsInputs in;
  in.frames = &phonetic.frames;
  in.accent = &profile.accent;
  in.gender = &profile.gender;
  in.speaker = &profile.speaker;
  in.pitch = &pitch;
  return models::to_mel((*bundle.sts)(in), dsp_of(bundle));
}

audio::AudioBuffer render(const models::ModelBundle& bundle,
                          const audio::MelSpectrogram& mel, std::size_t samples) {
  audio::AudioBuffer out = bundle.vocoder->vocode(mel);
  if (out.size() > samples) out.samples.resize(samples);
  return out;
}

audio::AudioBuffer convert(const models::ModelBundle& bundle,
                           const audio::AudioBuffer& audio,
                           const std::optional<VoiceProfile>& profile) {
  check_bundle(bundle);
  Features f = analyze(bundle, audio);
  VoiceProfile p = profile ? *profile : profile_from_audio(bundle, audio);
  return render(bundle, predict_mel(bundle, f, p), audio.size());
}

}  // namespace acvc::pipeline
