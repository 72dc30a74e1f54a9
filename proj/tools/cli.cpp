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


#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "acvc/audio/mel.hpp"
#include "acvc/audio/pitch.hpp"
#include "acvc/audio/resample.hpp"
#include "acvc/audio/wav.hpp"
#include "acvc/io/checkpoint.hpp"
#include "acvc/io/config.hpp"
#include "acvc/io/manifest.hpp"
#include "acvc/io/synth.hpp"
#include "acvc/pipeline/pipeline.hpp"
#include "acvc/pipeline/train.hpp"
#include "acvc/text/metrics.hpp"
#include "acvc/text/text.hpp"
#include "json.hpp"

namespace acvc::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Thrown for usage problems found after parsing (missing flag combinations).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  bool json = false;
  std::uint64_t seed = 0;
  std::string preset = "toy";
  std::string ckpt;
  std::string config_path;
  io::Config config;
};

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      // First column left-aligned, numbers right-aligned.
      if (c == 0) {
        out << cells[c] << std::string(width[c] - cells[c].size(), ' ');
      } else {
        out << std::string(width[c] - cells[c].size(), ' ') << cells[c];
      }
    }
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

audio::AudioBuffer read_audio(const std::string& path, int rate) {
  audio::AudioBuffer a = audio::load_wav(path);
  if (a.sample_rate != rate) a = audio::resample(a, rate);
  return a;
}

models::ModelBundle obtain_bundle(const Global& g, std::ostream& err,
                                  bool ablation = false) {
  if (!g.ckpt.empty()) return io::load_bundle(g.ckpt);
  if (!g.json) {
    err << "note: no --ckpt given, using untrained " << g.preset
        << " weights (seed " << g.seed << ")\n";
  }
  auto b = models::ModelBundle::create(nn::preset_by_name(g.preset), g.seed, ablation);
  b.set_frozen(true);
  return b;
}

Json report_json(const std::string& mode, const pipeline::LatencyReport& r) {
  Json j;
  j["mode"] = mode;
  j["iterations"] = r.iterations;
  j["mean_ms"] = r.mean_ms;
  j["p50_ms"] = r.p50_ms;
  j["p95_ms"] = r.p95_ms;
  j["audio_seconds"] = r.audio_seconds;
  j["wall_seconds"] = r.wall_seconds;
  j["rtfx"] = r.rtfx;
  return j;
}

std::vector<std::string> report_row(const std::string& mode,
                                    const pipeline::LatencyReport& r) {
  return {mode, std::to_string(r.iterations), fixed(r.mean_ms, 2), fixed(r.p50_ms, 2),
          fixed(r.p95_ms, 2), fixed(r.rtfx, 2)};
}

double norm(const ad::Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

std::size_t argmax(const ad::Tensor& t) {
  auto d = t.data();
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

// ---------------------------------------------------------------- commands

struct PreprocessArgs {
  std::string in, out;
};

int cmd_preprocess(const Global& g, const PreprocessArgs& a, std::ostream& out) {
  audio::DspConfig dsp = io::dsp_from_config(g.config);
  auto audio = read_audio(a.in, dsp.sample_rate);
  auto mel = audio::mel_spectrogram(audio, dsp);
  double lo = mel.bands.front(), hi = lo, sum = 0.0;
  for (double v : mel.bands) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  const double mean = sum / static_cast<double>(mel.bands.size());
  if (!a.out.empty()) {
    Json j;
    j["sample_rate"] = dsp.sample_rate;
    j["hop_size"] = dsp.hop_size;
    j["n_mels"] = mel.n_mels;
    j["frames"] = mel.frames;
    j["normalization"] = "none";
    Json rows = Json::array();
    for (std::size_t t = 0; t < mel.frames; ++t) {
      Json row = Json::array();
      for (std::size_t b = 0; b < mel.n_mels; ++b) row.push_back(mel.at(b, t));
      rows.push_back(std::move(row));
    }
    j["log_mel"] = std::move(rows);
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << j.dump() << "\n";
  }
  if (g.json) {
    Json j;
    j["input"] = a.in;
    j["seconds"] = audio.duration_seconds();
    j["frames"] = mel.frames;
    j["n_mels"] = mel.n_mels;
    j["min"] = lo;
    j["max"] = hi;
    j["mean"] = mean;
    out << j.dump() << "\n";
  } else {
    print_table(out, {"input", "seconds", "frames", "bands", "min", "max", "mean"},
                {{a.in, fixed(audio.duration_seconds()), std::to_string(mel.frames),
                  std::to_string(mel.n_mels), fixed(lo), fixed(hi), fixed(mean)}});
  }
  return 0;
}

struct PitchArgs {
  std::string in;
  double f_min = 60.0, f_max = 400.0;
  bool frames = false;
};

int cmd_pitch(const Global& g, const PitchArgs& a, std::ostream& out) {
  audio::DspConfig dsp = io::dsp_from_config(g.config);
  auto audio = read_audio(a.in, dsp.sample_rate);
  auto contour = audio::extract_pitch(audio, dsp, a.f_min, a.f_max);
  const double hop_s = static_cast<double>(dsp.hop_size) / dsp.sample_rate;
  std::vector<double> voiced;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    if (contour.voiced[i]) voiced.push_back(contour.f0[i]);
  }
  double median = 0.0;
  if (!voiced.empty()) {
    std::sort(voiced.begin(), voiced.end());
    median = voiced[voiced.size() / 2];
  }
  if (g.json) {
    for (std::size_t i = 0; i < contour.size(); ++i) {
      Json j;
      j["frame"] = i;
      j["time"] = static_cast<double>(i) * hop_s;
      j["f0"] = contour.f0[i];
      j["voiced"] = static_cast<bool>(contour.voiced[i]);
      out << j.dump() << "\n";
    }
    return 0;
  }
  if (a.frames) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < contour.size(); ++i) {
      rows.push_back({std::to_string(i), fixed(static_cast<double>(i) * hop_s),
                      fixed(contour.f0[i], 1), contour.voiced[i] ? "yes" : "no"});
    }
    print_table(out, {"frame", "time", "f0", "voiced"}, rows);
  }
  print_table(out, {"input", "frames", "voiced", "median f0"},
              {{a.in, std::to_string(contour.size()), std::to_string(voiced.size()),
                fixed(median, 1)}});
  return 0;
}

struct EmbedArgs {
  std::string in, out;
};

int cmd_embed(const Global& g, const EmbedArgs& a, std::ostream& out, std::ostream& err) {
  auto bundle = obtain_bundle(g, err);
  auto audio = read_audio(a.in, bundle.vocoder->config().sample_rate);
  auto profile = pipeline::profile_from_audio(bundle, audio);
  std::optional<models::AegeModel::Output> logits;
  if (bundle.aege) {
    ad::NoGradGuard no_grad;
    logits = (*bundle.aege)(models::mel_tensor(
        audio::mel_spectrogram(audio, bundle.vocoder->config())));
  }
  std::vector<const models::Embedding*> all = {&profile.accent, &profile.gender,
                                               &profile.speaker};
  if (!a.out.empty()) {
    Json j;
    for (const auto* e : all) {
      j[models::to_string(e->kind)] = std::vector<double>(e->values.data().begin(),
                                                          e->values.data().end());
    }
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << j.dump() << "\n";
  }
  if (g.json) {
    for (const auto* e : all) {
      Json j;
      j["embedding"] = models::to_string(e->kind);
      j["dim"] = e->values.numel();
      j["norm"] = norm(e->values);
      j["values"] = std::vector<double>(e->values.data().begin(), e->values.data().end());
      out << j.dump() << "\n";
    }
    if (logits) {
      Json j;
      j["accent_class"] = argmax(logits->accent_logits);
      j["gender"] = io::gender_name(argmax(logits->gender_logits));
      out << j.dump() << "\n";
    }
    return 0;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto* e : all) {
    rows.push_back({models::to_string(e->kind), std::to_string(e->values.numel()),
                    fixed(norm(e->values), 4)});
  }
  print_table(out, {"embedding", "dim", "norm"}, rows);
  if (logits) {
    out << "predicted accent class " << argmax(logits->accent_logits) << ", gender "
        << io::gender_name(argmax(logits->gender_logits)) << "\n";
  }
  return 0;
}

struct ConvertArgs {
  std::string in, out, profile, accent_from, gender_from, speaker_from;
  std::string pitch = "passthrough";
};

int cmd_convert(const Global& g, const ConvertArgs& a, std::ostream& out,
                std::ostream& err) {
  auto bundle = obtain_bundle(g, err);
  const int rate = bundle.vocoder->config().sample_rate;
  auto audio = read_audio(a.in, rate);
  auto t0 = Clock::now();
  auto profile = pipeline::profile_from_audio(
      bundle, a.profile.empty() ? audio : read_audio(a.profile, rate));
  if (!a.accent_from.empty()) {
    profile.accent = pipeline::profile_from_audio(bundle, read_audio(a.accent_from, rate)).accent;
  }
  if (!a.gender_from.empty()) {
    profile.gender = pipeline::profile_from_audio(bundle, read_audio(a.gender_from, rate)).gender;
  }
  if (!a.speaker_from.empty()) {
    profile.speaker =
        pipeline::profile_from_audio(bundle, read_audio(a.speaker_from, rate)).speaker;
  }
  profile.pitch = pipeline::parse_pitch_policy(a.pitch);
  auto converted = pipeline::convert(bundle, audio, profile);
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  audio::save_wav(a.out, converted);
  if (g.json) {
    Json j;
    j["input"] = a.in;
    j["output"] = a.out;
    j["input_seconds"] = audio.duration_seconds();
    j["output_seconds"] = converted.duration_seconds();
    j["pitch"] = pipeline::to_string(profile.pitch);
    j["elapsed_ms"] = ms;
    out << j.dump() << "\n";
  } else {
    print_table(out, {"output", "input s", "output s", "pitch", "elapsed ms"},
                {{a.out, fixed(audio.duration_seconds()), fixed(converted.duration_seconds()),
                  pipeline::to_string(profile.pitch), fixed(ms, 1)}});
  }
  return 0;
}

struct StreamArgs {
  std::string in, out, enroll;
  double chunk = 0.2;
  std::size_t context = 8;
  std::string pitch = "passthrough";
};

int cmd_stream(const Global& g, const StreamArgs& a, std::ostream& out, std::ostream& err) {
  auto bundle = obtain_bundle(g, err);
  const auto& dsp = bundle.vocoder->config();
  auto audio = read_audio(a.in, dsp.sample_rate);
  pipeline::StreamConfig cfg;
  cfg.chunk_seconds = a.chunk;
  cfg.left_context_frames = a.context;
  std::optional<audio::AudioBuffer> enrollment;
  if (!a.enroll.empty()) {
    cfg.profile_source = pipeline::ProfileSource::kEnrollment;
    enrollment = read_audio(a.enroll, dsp.sample_rate);
  }
  auto chunks = pipeline::split_chunks(audio, cfg, dsp);
  auto result = pipeline::stream_convert(bundle, chunks, cfg,
                                         enrollment ? &*enrollment : nullptr,
                                         pipeline::parse_pitch_policy(a.pitch));
  audio::AudioBuffer joined;
  joined.sample_rate = dsp.sample_rate;
  for (const auto& c : result.chunks) {
    joined.samples.insert(joined.samples.end(), c.samples.begin(), c.samples.end());
  }
  if (!a.out.empty()) audio::save_wav(a.out, joined);
  const auto& r = result.report;
  if (g.json) {
    for (std::size_t i = 0; i < result.chunks.size(); ++i) {
      Json j;
      j["chunk"] = i;
      j["input_samples"] = chunks[i].size();
      j["output_samples"] = result.chunks[i].size();
      j["latency_ms"] = r.latencies_ms[i];
      out << j.dump() << "\n";
    }
    Json s = report_json("stream", r);
    s["output_seconds"] = joined.duration_seconds();
    out << s.dump() << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < result.chunks.size(); ++i) {
    rows.push_back({std::to_string(i), std::to_string(chunks[i].size()),
                    std::to_string(result.chunks[i].size()), fixed(r.latencies_ms[i], 2)});
  }
  print_table(out, {"chunk", "in samples", "out samples", "latency ms"}, rows);
  out << "\n";
  print_table(out, {"mode", "chunks", "mean ms", "p50 ms", "p95 ms", "rtfx"},
              {report_row("stream", r)});
  return 0;
}

audio::AudioBuffer synthetic_clip(std::uint64_t seed, double seconds, int rate) {
  io::CorpusSpec spec;
  spec.sample_rate = rate;
  auto corpus = io::synthesize_corpus(spec, seed);
  audio::AudioBuffer clip;
  clip.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  for (std::size_t i = 0; clip.size() < n; i = (i + 1) % corpus.size()) {
    const auto& s = corpus[i].audio.samples;
    clip.samples.insert(clip.samples.end(), s.begin(), s.end());
  }
  clip.samples.resize(n);
  return clip;
}

struct BenchmarkArgs {
  std::string in;
  std::size_t iterations = 200;
  double seconds = 5.0;
};

int cmd_benchmark(const Global& g, const BenchmarkArgs& a, std::ostream& out,
                  std::ostream& err) {
  auto bundle = obtain_bundle(g, err);
  const int rate = bundle.vocoder->config().sample_rate;
  auto audio = a.in.empty() ? synthetic_clip(g.seed, a.seconds, rate) : read_audio(a.in, rate);
  auto report = pipeline::benchmark(bundle, audio, a.iterations);
  if (g.json) {
    for (auto [mode, r] : {std::pair{"with_profile", &report.with_profile},
                           std::pair{"precomputed_profile", &report.precomputed}}) {
      Json j = report_json(mode, *r);
      j["clip_seconds"] = report.clip_seconds;
      j["warmup"] = 1;
      out << j.dump() << "\n";
    }
    return 0;
  }
  out << "clip " << fixed(report.clip_seconds, 2) << " s, 1 warmup + " << a.iterations
      << " timed iterations per mode\n";
  print_table(out, {"mode", "iterations", "mean ms", "p50 ms", "p95 ms", "rtfx"},
              {report_row("with profile", report.with_profile),
               report_row("precomputed profile", report.precomputed)});
  return 0;
}

struct TrainArgs {
  std::string manifest, out, log, stage = "all";
  std::size_t steps = 0;
  double lr = 0.0;
  bool ablation = false;
  std::optional<double> dropout;
};

int cmd_train(const Global& g, const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto bundle = obtain_bundle(g, err, a.ablation);
  auto records = io::read_manifest(a.manifest, bundle.preset.accent_classes);
  if (records.empty()) throw std::runtime_error(a.manifest + " lists no utterances");
  const std::string base = fs::path(a.manifest).parent_path().string();
  auto data = pipeline::load_training_set(records, base.empty() ? "." : base,
                                          bundle.vocoder->config(),
                                          text::Tokenizer::builtin());
  std::vector<pipeline::Stage> stages;
  if (a.stage == "all") {
    if (bundle.ablation) {
      stages = {pipeline::Stage::kSe, pipeline::Stage::kAblation};
    } else {
      stages = {pipeline::Stage::kAege, pipeline::Stage::kSe, pipeline::Stage::kStp,
                pipeline::Stage::kSts};
    }
  } else {
    stages = {pipeline::stage_from_string(a.stage)};
  }
  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw std::runtime_error("cannot write " + a.log);
  }
  std::vector<std::vector<std::string>> rows;
  for (auto stage : stages) {
    pipeline::TrainConfig cfg;
    cfg.stage = stage;
    cfg.steps = a.steps ? a.steps
                        : static_cast<std::size_t>(g.config.get_int(
                              "train.steps." + pipeline::to_string(stage), 0));
    cfg.seed = g.seed;
    cfg.dropout = a.dropout;
    if (a.lr > 0.0) {
      auto o = pipeline::default_optimizer(
          stage, cfg.steps ? cfg.steps : pipeline::default_steps(stage));
      o.lr = a.lr;
      cfg.optimizer = o;
    }
    cfg.on_step = [&](const pipeline::TrainLogEntry& e) {
      std::string line = pipeline::to_json_line(e);
      if (log.is_open()) log << line << "\n";
      if (g.json) out << line << "\n";
    };
    auto t0 = Clock::now();
    auto r = pipeline::train(bundle, data, cfg);
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    if (g.json) {
      Json j;
      j["stage"] = pipeline::to_string(stage);
      j["steps"] = r.log.size();
      j["initial_loss"] = r.initial_loss;
      j["final_loss"] = r.final_loss;
      j["frozen_grad_norm"] = r.frozen_grad_norm;
      j["seconds"] = s;
      out << j.dump() << "\n";
    }
    rows.push_back({pipeline::to_string(stage), std::to_string(r.log.size()),
                    fixed(r.initial_loss, 4), fixed(r.final_loss, 4),
                    fixed(r.frozen_grad_norm, 1), fixed(s, 1)});
  }
  io::save_bundle(bundle, a.out, {{"seed", std::to_string(g.seed)}});
  if (!g.json) {
    print_table(out, {"stage", "steps", "initial loss", "final loss", "frozen grad", "seconds"},
                rows);
    out << "saved " << a.out << "\n";
  }
  return 0;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

struct EvalArgs {
  std::string ref, hyp, manifest;
  bool normalize = false;
};

int cmd_eval_asr(const Global& g, const EvalArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> refs, hyps, ids;
  if (!a.manifest.empty()) {
    // Transcribe each utterance with the phonetic recognizer.
    auto bundle = obtain_bundle(g, err);
    auto records = io::read_manifest(a.manifest, bundle.preset.accent_classes);
    const auto tok = text::Tokenizer::builtin();
    const std::string base = fs::path(a.manifest).parent_path().string();
    const int rate = bundle.vocoder->config().sample_rate;
    for (const auto& r : records) {
      fs::path p(r.audio_filepath);
      if (p.is_relative()) p = fs::path(base.empty() ? "." : base) / p;
      auto audio = read_audio(p.string(), rate);
      auto profile = pipeline::profile_from_audio(bundle, audio);
      ad::NoGradGuard no_grad;
      auto mel = audio::mel_spectrogram(audio, bundle.vocoder->config());
      auto ph = (*bundle.stp)(models::mel_tensor(mel), &profile.accent);
      refs.push_back(text::normalize_text(r.text));
      hyps.push_back(text::greedy_ctc_decode(ph.log_probs.data(), ph.log_probs.dim(0),
                                             ph.log_probs.dim(1), tok));
      ids.push_back(r.audio_filepath);
    }
  } else {
    if (a.ref.empty() || a.hyp.empty()) {
      throw UsageError("eval-asr needs --ref and --hyp, or --manifest");
    }
    refs = read_lines(a.ref);
    hyps = read_lines(a.hyp);
    if (refs.size() != hyps.size()) {
      throw std::runtime_error(a.ref + " has " + std::to_string(refs.size()) + " lines but " +
                               a.hyp + " has " + std::to_string(hyps.size()));
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ids.push_back(std::to_string(i + 1));
      if (a.normalize) {
        refs[i] = text::normalize_text(refs[i]);
        hyps[i] = text::normalize_text(hyps[i]);
      }
    }
  }
  if (refs.empty()) throw std::runtime_error("nothing to score");
  text::EditCounts words, chars;
  auto add = [](text::EditCounts& total, const text::EditCounts& c) {
    total.substitutions += c.substitutions;
    total.insertions += c.insertions;
    total.deletions += c.deletions;
    total.reference_units += c.reference_units;
  };
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto m = text::wer_cer(refs[i], hyps[i]);
    add(words, m.words);
    add(chars, m.chars);
    if (g.json) {
      Json j;
      j["id"] = ids[i];
      j["reference"] = refs[i];
      j["hypothesis"] = hyps[i];
      j["wer"] = m.wer;
      j["cer"] = m.cer;
      out << j.dump() << "\n";
    }
    rows.push_back({ids[i], fixed(m.wer, 4), fixed(m.cer, 4), hyps[i]});
  }
  if (g.json) {
    Json j;
    j["id"] = "total";
    j["utterances"] = refs.size();
    j["wer"] = words.rate();
    j["cer"] = chars.rate();
    j["word_errors"] = words.errors();
    j["reference_words"] = words.reference_units;
    j["char_errors"] = chars.errors();
    j["reference_chars"] = chars.reference_units;
    out << j.dump() << "\n";
    return 0;
  }
  if (!a.manifest.empty()) print_table(out, {"utterance", "wer", "cer", "hypothesis"}, rows);
  print_table(out, {"utterances", "wer", "cer", "word errors", "char errors"},
              {{std::to_string(refs.size()), fixed(words.rate(), 4), fixed(chars.rate(), 4),
                std::to_string(words.errors()) + "/" + std::to_string(words.reference_units),
                std::to_string(chars.errors()) + "/" + std::to_string(chars.reference_units)}});
  return 0;
}

struct SynthArgs {
  std::string out;
  io::CorpusSpec spec;
};

int cmd_synth(const Global& g, const SynthArgs& a, std::ostream& out) {
  auto records = io::generate_synthetic_corpus(a.spec, g.seed, a.out);
  double seconds = 0.0;
  for (const auto& r : records) seconds += r.duration;
  if (g.json) {
    out << io::serialize_manifest(records);
    return 0;
  }
  out << "wrote " << records.size() << " utterances (" << fixed(seconds, 2) << " s) and "
      << (fs::path(a.out) / "manifest.jsonl").string() << "\n";
  return 0;
}

struct InspectArgs {
  bool tensors = false;
};

int cmd_inspect(const Global& g, const InspectArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<io::Checkpoint> ckpt;
  if (!g.ckpt.empty()) ckpt = io::read_checkpoint(g.ckpt);
  auto bundle = obtain_bundle(g, err, false);
  if (ckpt && ckpt->metadata.count("ablation") && ckpt->metadata.at("ablation") == "1") {
    bundle = io::load_bundle(g.ckpt);
  }
  auto counts = models::count_parameters(bundle);
  // Reference sizes in millions for the full preset.
  const std::map<std::string, double> reference = {
      {"aege", 24.9}, {"se", 4.3}, {"stp", 82.1}, {"sts", 52.7}, {"full_sts", 164.0}};
  const bool show_reference = bundle.preset.name == "full";
  std::vector<models::ModelCount> all = counts.models;
  all.push_back(counts.full_sts);
  if (g.json) {
    if (ckpt) {
      Json meta(ckpt->metadata);
      out << Json{{"metadata", meta}, {"tensors", ckpt->entries.size()}}.dump() << "\n";
      if (a.tensors) {
        for (const auto& e : ckpt->entries) {
          out << Json{{"tensor", e.name}, {"shape", e.shape}}.dump() << "\n";
        }
      }
    }
    for (const auto& m : all) {
      Json j;
      j["model"] = m.name;
      j["parameters"] = m.total;
      if (show_reference && reference.count(m.name)) {
        j["reference_millions"] = reference.at(m.name);
      }
      out << j.dump() << "\n";
    }
    return 0;
  }
  if (ckpt) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [k, v] : ckpt->metadata) rows.push_back({k, v});
    print_table(out, {"key", "value"}, rows);
    out << ckpt->entries.size() << " tensors\n\n";
    if (a.tensors) {
      std::vector<std::vector<std::string>> t;
      for (const auto& e : ckpt->entries) {
        std::string shape;
        for (auto d : e.shape) shape += (shape.empty() ? "" : "x") + std::to_string(d);
        t.push_back({e.name, shape});
      }
      print_table(out, {"tensor", "shape"}, t);
      out << "\n";
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : all) {
    std::vector<std::string> row = {m.name, std::to_string(m.total),
                                    fixed(static_cast<double>(m.total) / 1e6, 2)};
    if (show_reference) {
      row.push_back(reference.count(m.name) ? fixed(reference.at(m.name), 1) : "-");
    }
    rows.push_back(row);
  }
  std::vector<std::string> header = {"model", "parameters", "millions"};
  if (show_reference) header.push_back("reference M");
  out << "preset " << bundle.preset.name << (bundle.ablation ? " (ablation)" : "") << "\n";
  print_table(out, header, rows);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real-time accent conversion toolkit"};
  app.name("acvc");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Global g;
  app.add_flag("--json", g.json, "Line-delimited JSON records on stdout");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice");
  auto* preset_opt = app.add_option("--preset", g.preset, "Network sizes without --ckpt: toy or full");
  app.add_option("--ckpt", g.ckpt, "Model checkpoint");
  app.add_option("--config", g.config_path, "key = value file (preset, seed, dsp.*, ...)");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Log-mel spectrogram of a WAV file");
  c_pre->add_option("--in", pre.in, "Input WAV")->required();
  c_pre->add_option("--out", pre.out, "Write the frames as JSON");

  PitchArgs pitch;
  auto* c_pitch = app.add_subcommand("pitch", "Frame-wise F0 contour");
  c_pitch->add_option("--in", pitch.in, "Input WAV")->required();
  c_pitch->add_option("--fmin", pitch.f_min, "Lowest F0 in Hz");
  c_pitch->add_option("--fmax", pitch.f_max, "Highest F0 in Hz");
  c_pitch->add_flag("--frames", pitch.frames, "Print every frame");

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Accent, gender and speaker embeddings");
  c_embed->add_option("--in", embed.in, "Input WAV")->required();
  c_embed->add_option("--out", embed.out, "Write the vectors as JSON");

  ConvertArgs conv;
  auto* c_conv = app.add_subcommand("convert", "Convert one utterance");
  c_conv->add_option("--in", conv.in, "Input WAV")->required();
  c_conv->add_option("--out", conv.out, "Output WAV")->required();
  c_conv->add_option("--profile", conv.profile, "Copy every embedding from this WAV");
  c_conv->add_option("--accent-from", conv.accent_from, "Copy the accent from this WAV");
  c_conv->add_option("--gender-from", conv.gender_from, "Copy the gender from this WAV");
  c_conv->add_option("--speaker-from", conv.speaker_from, "Copy the voice from this WAV");
  c_conv->add_option("--pitch", conv.pitch, "passthrough, flat:<hz> or scale:<k>");

  StreamArgs stream;
  auto* c_stream = app.add_subcommand("stream", "Chunked streaming conversion");
  c_stream->add_option("--in", stream.in, "Input WAV")->required();
  c_stream->add_option("--out", stream.out, "Output WAV (joined chunks)");
  auto* chunk_opt = c_stream->add_option("--chunk", stream.chunk, "Chunk length in seconds");
  auto* context_opt = c_stream->add_option("--context", stream.context, "Left context in frames");
  c_stream->add_option("--enroll", stream.enroll, "Take the profile from this WAV");
  c_stream->add_option("--pitch", stream.pitch, "passthrough, flat:<hz> or scale:<k>");

  BenchmarkArgs bench;
  auto* c_bench = app.add_subcommand("benchmark", "Latency and throughput of convert");
  c_bench->add_option("--in", bench.in, "Input WAV (default: synthetic clip)");
  auto* iters_opt = c_bench->add_option("--iters", bench.iterations, "Timed iterations");
  c_bench->add_option("--seconds", bench.seconds, "Length of the synthetic clip");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train one stage or all stages");
  c_train->add_option("--manifest", tr.manifest, "Training manifest")->required();
  c_train->add_option("--out", tr.out, "Checkpoint to write")->required();
  c_train->add_option("--stage", tr.stage, "aege, se, stp, sts, ablation or all");
  c_train->add_option("--steps", tr.steps, "Steps per stage (0: built-in budget)");
  c_train->add_option("--lr", tr.lr, "Learning rate override");
  c_train->add_option("--dropout", tr.dropout, "Dropout override");
  c_train->add_option("--log", tr.log, "Write the step log as JSON lines");
  c_train->add_flag("--ablation", tr.ablation, "Start from a new ablation bundle");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval-asr", "WER and CER");
  c_eval->add_option("--ref", ev.ref, "Reference transcripts, one per line");
  c_eval->add_option("--hyp", ev.hyp, "Hypotheses, one per line");
  c_eval->add_option("--manifest", ev.manifest, "Transcribe these utterances instead");
  c_eval->add_flag("--normalize", ev.normalize, "Normalize both sides first");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth-data", "Write a synthetic corpus");
  c_syn->add_option("--out", syn.out, "Output directory")->required();
  c_syn->add_option("--speakers", syn.spec.speakers, "Speakers");
  c_syn->add_option("--accents", syn.spec.accents, "Accent classes");
  c_syn->add_option("--utterances", syn.spec.utterances, "Utterances per speaker and accent");
  c_syn->add_option("--sample-rate", syn.spec.sample_rate, "Sample rate in Hz");

  InspectArgs insp;
  auto* c_insp = app.add_subcommand("inspect-ckpt", "Checkpoint metadata and parameter counts");
  c_insp->add_flag("--tensors", insp.tensors, "List every tensor");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->get_help_ptr() && sub->get_help_ptr()->count()) {
      out << sub->help();
      return 0;
    }
  }

  try {
    if (!g.config_path.empty()) {
      g.config = io::Config::load(g.config_path);
      if (!seed_opt->count() && g.config.contains("seed")) {
        g.seed = static_cast<std::uint64_t>(g.config.get_int("seed", 0));
      }
      if (!preset_opt->count()) g.preset = g.config.get("preset", g.preset);
      if (!chunk_opt->count()) stream.chunk = g.config.get_double("stream.chunk_seconds", stream.chunk);
      if (!context_opt->count()) {
        stream.context = static_cast<std::size_t>(
            g.config.get_int("stream.left_context_frames", static_cast<long>(stream.context)));
      }
      if (!iters_opt->count()) {
        bench.iterations = static_cast<std::size_t>(
            g.config.get_int("benchmark.iterations", static_cast<long>(bench.iterations)));
      }
    }
    nn::preset_by_name(g.preset);  // validates the name early

    if (c_pre->parsed()) return cmd_preprocess(g, pre, out);
    if (c_pitch->parsed()) return cmd_pitch(g, pitch, out);
    if (c_embed->parsed()) return cmd_embed(g, embed, out, err);
    if (c_conv->parsed()) return cmd_convert(g, conv, out, err);
    if (c_stream->parsed()) return cmd_stream(g, stream, out, err);
    if (c_bench->parsed()) return cmd_benchmark(g, bench, out, err);
    if (c_train->parsed()) return cmd_train(g, tr, out, err);
    if (c_eval->parsed()) return cmd_eval_asr(g, ev, out, err);
    if (c_syn->parsed()) return cmd_synth(g, syn, out);
    if (c_insp->parsed()) return cmd_inspect(g, insp, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace acvc::cli
