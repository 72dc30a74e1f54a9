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


#include "acvc/pipeline/train.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include "acvc/audio/mel.hpp"
#include "acvc/audio/pitch.hpp"
#include "acvc/audio/resample.hpp"
#include "acvc/audio/wav.hpp"
#include "acvc/losses/ctc.hpp"
#include "acvc/losses/losses.hpp"
#include "acvc/pipeline/pipeline.hpp"
#include "json.hpp"

namespace acvc::pipeline {

namespace {

using ad::Tensor;
using models::Embedding;

struct StageNets {
  std::vector<nn::ParamStore*> trained;
  std::vector<std::pair<std::string, nn::ParamStore*>> frozen;
};

StageNets split_networks(models::ModelBundle& bundle, Stage stage) {
  std::vector<std::string> names;
  switch (stage) {
    case Stage::kAege: names = {"aege"}; break;
    case Stage::kSe: names = {"se"}; break;
    case Stage::kStp: names = {"stp"}; break;
    case Stage::kSts: names = {"sts"}; break;
    case Stage::kAblation: names = {"stp", "sts"}; break;
  }
  StageNets nets;
  for (auto& [name, store] : bundle.stores()) {
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      nets.trained.push_back(store);
    } else {
      nets.frozen.emplace_back(name, store);
    }
  }
  return nets;
}

// Targets padded to the 4T' output grid, with the validity mask.
struct MelTarget {
  Tensor frames;
  std::vector<double> mask;
};

MelTarget mel_target(const audio::MelSpectrogram& mel) {
  const std::size_t out_frames = 4 * models::StpModel::output_frames(mel.frames);
  std::vector<double> fm = mel.frame_major();
  fm.resize(out_frames * mel.n_mels, 0.0);
  MelTarget t;
  t.frames = Tensor::from_vector({out_frames, mel.n_mels}, std::move(fm));
  t.mask.assign(out_frames, 0.0);
  std::fill(t.mask.begin(), t.mask.begin() + static_cast<std::ptrdiff_t>(mel.frames), 1.0);
  return t;
}

// Outputs of upstream networks, fixed for the whole stage.
struct Cache {
  std::vector<Tensor> mel;
  std::vector<Tensor> se_input;  // waveform at the SE rate
  std::vector<MelTarget> target;
  std::vector<Embedding> accent, gender, speaker;
  std::vector<Tensor> phonetic;
};

void check_labels(const models::ModelBundle& bundle, const TrainingSet& data,
                  Stage stage) {
  if (data.examples.empty()) throw TrainError("training set is empty");
  for (const auto& ex : data.examples) {
    const auto& r = ex.record;
    if (r.accent >= bundle.preset.accent_classes) {
      throw TrainError(r.audio_filepath + ": accent " + std::to_string(r.accent) +
                       " outside the preset's " +
                       std::to_string(bundle.preset.accent_classes) + " classes");
    }
    if (ex.mel.n_mels != bundle.preset.n_mels) {
      throw TrainError(r.audio_filepath + ": features have " +
                       std::to_string(ex.mel.n_mels) + " mel bands, preset " +
                       bundle.preset.name + " expects " +
                       std::to_string(bundle.preset.n_mels));
    }
    if (stage == Stage::kStp || stage == Stage::kAblation) {
      std::size_t steps = models::StpModel::output_frames(ex.mel.frames);
      if (losses::ctc_min_steps(ex.tokens) > steps) {
        throw TrainError(r.audio_filepath + ": transcript needs " +
                         std::to_string(losses::ctc_min_steps(ex.tokens)) +
                         " CTC steps but the encoder emits " + std::to_string(steps));
      }
    }
  }
  if (stage == Stage::kSe && data.speakers.size() < 2) {
    throw TrainError("speaker training needs at least two speakers");
  }
}

Tensor as_tensor(const audio::AudioBuffer& a) {
  std::vector<double> v(a.samples.begin(), a.samples.end());
  const std::size_t n = v.size();
  return Tensor::from_vector({n}, std::move(v));
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::kAege: return "aege";
    case Stage::kSe: return "se";
    case Stage::kStp: return "stp";
    case Stage::kSts: return "sts";
    case Stage::kAblation: return "ablation";
  }
  return "?";
}

Stage stage_from_string(const std::string& name) {
  for (Stage s : {Stage::kAege, Stage::kSe, Stage::kStp, Stage::kSts, Stage::kAblation}) {
    if (to_string(s) == name) return s;
  }
  throw TrainError("unknown stage '" + name + "' (expected aege, se, stp, sts or ablation)");
}

std::vector<Stage> prerequisites(Stage stage) {
  switch (stage) {
    case Stage::kStp: return {Stage::kAege};
    case Stage::kSts: return {Stage::kAege, Stage::kSe, Stage::kStp};
    case Stage::kAblation: return {Stage::kSe};
    default: return {};
  }
}

std::size_t default_steps(Stage stage) {
  switch (stage) {
    case Stage::kAege: return 100;
    case Stage::kSe: return 60;
    case Stage::kStp: return 800;
    case Stage::kSts: return 500;
    case Stage::kAblation: return 600;
  }
  return 0;
}

ad::OptimizerConfig default_optimizer(Stage stage, std::size_t steps) {
  ad::OptimizerConfig c;
  c.lr = 1e-3;
  c.lr_min = 0.0;
  c.schedule_steps = static_cast<long>(steps);
  if (stage == Stage::kAege) {
    c.kind = ad::OptimizerKind::kSgd;
    c.momentum = 0.9;
    c.weight_decay = 2e-4;
  } else {
    c.kind = ad::OptimizerKind::kAdamW;
    c.weight_decay = 1e-3;
  }
  return c;
}

std::string to_json_line(const TrainLogEntry& entry) {
  nlohmann::ordered_json j;
  j["step"] = entry.step;
  j["stage"] = to_string(entry.stage);
  j["loss"] = entry.loss;
  j["lr"] = entry.lr;
  return j.dump();
}

TrainingSet make_training_set(std::vector<io::ManifestRecord> records,
                              std::vector<audio::AudioBuffer> audio,
                              const audio::DspConfig& dsp,
                              const text::Tokenizer& tokenizer) {
  if (records.size() != audio.size()) {
    throw TrainError("record and audio counts differ");
  }
  TrainingSet set;
  for (std::size_t i = 0; i < records.size(); ++i) {
    TrainingExample ex;
    ex.record = std::move(records[i]);
    ex.audio = std::move(audio[i]);
    if (ex.audio.sample_rate != dsp.sample_rate) {
      ex.audio = audio::resample(ex.audio, dsp.sample_rate);
    }
    ex.mel = audio::mel_spectrogram(ex.audio, dsp);
    ex.pitch = audio::extract_pitch(ex.audio, dsp);
    ex.tokens = tokenizer.encode(text::normalize_text(ex.record.text));
    auto it = std::find(set.speakers.begin(), set.speakers.end(), ex.record.speaker);
    ex.speaker = static_cast<std::size_t>(it - set.speakers.begin());
    if (it == set.speakers.end()) set.speakers.push_back(ex.record.speaker);
    set.examples.push_back(std::move(ex));
  }
  return set;
}

TrainingSet load_training_set(const std::vector<io::ManifestRecord>& records,
                              const std::string& base_dir,
                              const audio::DspConfig& dsp,
                              const text::Tokenizer& tokenizer) {
  std::vector<audio::AudioBuffer> audio;
  for (const auto& r : records) {
    std::filesystem::path p(r.audio_filepath);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    audio.push_back(audio::load_wav(p.string()));
  }
  return make_training_set(records, std::move(audio), dsp, tokenizer);
}

TrainResult train(models::ModelBundle& bundle, const TrainingSet& data,
                  const TrainConfig& cfg) {
  check_bundle(bundle);
  const Stage stage = cfg.stage;
  if ((stage == Stage::kAblation) != bundle.ablation && stage != Stage::kSe) {
    throw TrainError("stage " + to_string(stage) + " does not apply to " +
                     (bundle.ablation ? "an ablation" : "a full") + " bundle");
  }
  for (Stage pre : prerequisites(stage)) {
    if (!bundle.trained.count(to_string(pre))) {
      throw TrainError("stage " + to_string(stage) + " needs stage " +
                       to_string(pre) + " to be trained first");
    }
  }
  check_labels(bundle, data, stage);

  const std::size_t steps = cfg.steps ? cfg.steps : default_steps(stage);
  const ad::OptimizerConfig ocfg =
      cfg.optimizer ? *cfg.optimizer : default_optimizer(stage, steps);
  std::mt19937_64 rng(cfg.seed);
  nn::ForwardContext train_ctx{true, &rng, cfg.dropout.value_or(bundle.preset.dropout)};
  train_ctx.running_statistics = true;
  const nn::ForwardContext eval_ctx{};

  bundle.set_frozen(true);
  StageNets nets = split_networks(bundle, stage);
  for (auto* store : nets.trained) store->set_frozen(false);

  const std::size_t n = data.examples.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  Cache cache;
  {
    ad::NoGradGuard no_grad;
    for (const auto& ex : data.examples) {
      cache.mel.push_back(models::mel_tensor(ex.mel));
      cache.target.push_back(mel_target(ex.mel));
      if (stage == Stage::kSe) {
        cache.se_input.push_back(as_tensor(
            audio::resample(ex.audio, bundle.se->sample_rate())));
      }
      if (stage == Stage::kStp || stage == Stage::kSts) {
        auto out = (*bundle.aege)(cache.mel.back(), eval_ctx);
        cache.accent.push_back(out.accent);
        cache.gender.push_back(out.gender);
      }
      if (stage == Stage::kSts || stage == Stage::kAblation) {
        cache.speaker.push_back((*bundle.se)(ex.audio, eval_ctx));
      }
      if (stage == Stage::kSts) {
        cache.phonetic.push_back(
            (*bundle.stp)(cache.mel.back(), &cache.accent.back(), eval_ctx).frames);
      }
    }
  }

  nn::ParamStore head(cfg.seed ^ 0xaa17ULL, bundle.sts->params().precision());
  Tensor head_weights;
  if (stage == Stage::kSe) {
    const std::size_t e = bundle.preset.xvector.embedding_dim;
    head_weights = head.parameter("aam.weight", {data.speakers.size(), e},
                                  std::sqrt(6.0 / static_cast<double>(data.speakers.size() + e)));
  }

  // Loss of example i. With `through_frozen`, upstream networks run inside
  // the graph instead of coming from the cache.
  auto example_loss = [&](std::size_t i, const nn::ForwardContext& ctx,
                          bool through_frozen) -> Tensor {
    const TrainingExample& ex = data.examples[i];
    switch (stage) {
      case Stage::kAege: {
        auto out = (*bundle.aege)(cache.mel[i], ctx);
        return losses::accent_gender_loss(out.accent_logits, ex.record.accent,
                                          out.gender_logits,
                                          io::gender_index(ex.record.gender));
      }
      case Stage::kSe: {
        auto emb = bundle.se->embed(cache.se_input[i], ctx);
        return losses::aam_loss(emb.values, head_weights, ex.speaker);
      }
      case Stage::kStp: {
        auto out = (*bundle.stp)(cache.mel[i], &cache.accent[i], ctx);
        return losses::ctc_loss(out.log_probs, ex.tokens);
      }
      case Stage::kSts: {
        Embedding accent = cache.accent[i], gender = cache.gender[i],
                  speaker = cache.speaker[i];
        Tensor phonetic = cache.phonetic[i];
        if (through_frozen) {
          auto a = (*bundle.aege)(cache.mel[i], eval_ctx);
          accent = a.accent;
          gender = a.gender;
          speaker = (*bundle.se)(ex.audio, eval_ctx);
          phonetic = (*bundle.stp)(cache.mel[i], &accent, eval_ctx).frames;
        }
        models::StsInputs in{&phonetic, &accent, &gender, &speaker, &ex.pitch};
        return losses::mel_loss((*bundle.sts)(in, ctx), cache.target[i].frames,
                                cache.target[i].mask);
      }
      case Stage::kAblation: {
        Embedding speaker = through_frozen ? (*bundle.se)(ex.audio, eval_ctx)
                                           : cache.speaker[i];
        auto ph = (*bundle.stp)(cache.mel[i], nullptr, ctx);
        models::StsInputs in{&ph.frames, nullptr, nullptr, &speaker, &ex.pitch};
        return ad::add(losses::ctc_loss(ph.log_probs, ex.tokens),
                       losses::mel_loss((*bundle.sts)(in, ctx), cache.target[i].frames,
                                        cache.target[i].mask));
      }
    }
    throw TrainError("unhandled stage");
  };

  auto eval_loss = [&] {
    ad::NoGradGuard no_grad;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += example_loss(i, eval_ctx, false).item();
    return total * inv_n;
  };

  std::vector<Tensor> params;
  for (auto* store : nets.trained) {
    auto t = store->trainable();
    params.insert(params.end(), t.begin(), t.end());
  }
  if (head_weights.defined()) params.push_back(head_weights);
  ad::Optimizer optimizer(params, ocfg);

  TrainResult result;
  result.stage = stage;
  for (const auto& [name, store] : nets.frozen) result.frozen.push_back(name);
  result.initial_loss = eval_loss();

  for (std::size_t step = 0; step < steps; ++step) {
    optimizer.zero_grad();
    for (auto& [name, store] : nets.frozen) store->zero_grad();
    // The first step routes gradients through the frozen networks so the
    // audit below sees them.
    const bool through_frozen = step == 0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor loss = ad::scale(example_loss(i, train_ctx, through_frozen), inv_n);
      ad::backward(loss);
      total += loss.item();
    }
    for (auto& [name, store] : nets.frozen) result.frozen_grad_norm += store->grad_norm();
    TrainLogEntry entry{step, stage, total, optimizer.current_lr()};
    optimizer.step();
    for (auto* store : nets.trained) store->round_to_storage();
    head.round_to_storage();
    result.log.push_back(entry);
    if (cfg.on_step) cfg.on_step(entry);
  }
  result.final_loss = eval_loss();

  bundle.set_frozen(true);
  bundle.trained.insert(to_string(stage));
  return result;
}

}  // namespace acvc::pipeline
