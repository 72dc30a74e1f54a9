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


#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "acvc/pipeline/bounded_queue.hpp"
#include "acvc/pipeline/pipeline.hpp"

namespace acvc::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Job {
  std::size_t index = 0;
  Clock::time_point start;
  std::size_t context = 0;  // samples of prepended left context
  std::size_t samples = 0;  // context + chunk
  Features features;
  audio::MelSpectrogram mel;
};

// First failure wins; every queue is closed so blocked stages wake up.
class FailureLatch {
 public:
  template <typename... Queues>
  void fail(std::exception_ptr e, Queues&... queues) {
    {
      std::lock_guard lock(mu_);
      if (!error_) error_ = e;
    }
    (queues.close(), ...);
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw PipelineError("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw PipelineError("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

LatencyReport summarize(std::vector<double> latencies_ms, double audio_seconds,
                        double wall_seconds) {
  LatencyReport r;
  r.iterations = latencies_ms.size();
  r.audio_seconds = audio_seconds;
  r.wall_seconds = wall_seconds;
  if (!latencies_ms.empty()) {
    r.mean_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) /
                latencies_ms.size();
    r.p50_ms = percentile(latencies_ms, 50.0);
    r.p95_ms = percentile(latencies_ms, 95.0);
  }
  r.rtfx = wall_seconds > 0.0 ? audio_seconds / wall_seconds
                              : std::numeric_limits<double>::infinity();
  r.latencies_ms = std::move(latencies_ms);
  return r;
}

void StreamConfig::validate(const audio::DspConfig& dsp) const {
  const double hop_seconds = static_cast<double>(dsp.hop_size) / dsp.sample_rate;
  if (!(chunk_seconds <= 0.2) || !(chunk_seconds >= hop_seconds)) {
    throw PipelineError("chunk_seconds must lie in [one hop, 0.2 s], got " +
                        std::to_string(chunk_seconds));
  }
}

std::vector<audio::AudioBuffer> split_chunks(const audio::AudioBuffer& audio,
                                             const StreamConfig& cfg,
                                             const audio::DspConfig& dsp) {
  cfg.validate(dsp);
  const auto step = static_cast<std::size_t>(std::lround(cfg.chunk_seconds * audio.sample_rate));
  std::vector<audio::AudioBuffer> out;
  for (std::size_t s = 0; s < audio.size(); s += step) {
    std::size_t e = std::min(audio.size(), s + step);
    if (e - s < dsp.hop_size && !out.empty()) {
      auto& last = out.back().samples;
      last.insert(last.end(), audio.samples.begin() + s, audio.samples.begin() + e);
      break;
    }
    audio::AudioBuffer c;
    c.sample_rate = audio.sample_rate;
    c.samples.assign(audio.samples.begin() + s, audio.samples.begin() + e);
    out.push_back(std::move(c));
  }
  return out;
}

StreamResult stream_convert(const models::ModelBundle& bundle,
                            const std::vector<audio::AudioBuffer>& chunks,
                            const StreamConfig& cfg,
                            const audio::AudioBuffer* enrollment,
                            const std::optional<PitchPolicy>& pitch) {
  check_bundle(bundle);
  const audio::DspConfig& dsp = bundle.vocoder->config();
  cfg.validate(dsp);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].size() < dsp.hop_size) {
      throw PipelineError("chunk " + std::to_string(i) + " has " +
                          std::to_string(chunks[i].size()) +
                          " samples, shorter than one hop (" +
                          std::to_string(dsp.hop_size) + ")");
    }
    if (chunks[i].sample_rate != dsp.sample_rate) {
      throw audio::AudioError("chunk " + std::to_string(i) + " is " +
                              std::to_string(chunks[i].sample_rate) + " Hz");
    }
  }

  StreamResult result;
  if (chunks.empty()) {
    result.report = summarize({}, 0.0, 0.0);
    return result;
  }
  if (cfg.profile_source == ProfileSource::kEnrollment) {
    if (!enrollment) throw PipelineError("enrollment profile requested without a clip");
    result.profile = profile_from_audio(bundle, *enrollment);
  } else {
    result.profile = profile_from_audio(bundle, chunks.front());
  }
  if (pitch) result.profile.pitch = *pitch;
  const VoiceProfile& profile = result.profile;

  BoundedQueue<Job> to_model(1), to_vocoder(1);
  FailureLatch latch;
  result.chunks.resize(chunks.size());
  std::vector<double> latencies(chunks.size(), 0.0);
  const Clock::time_point stream_start = Clock::now();

  std::thread ingest([&] {
    try {
      std::vector<float> history;
      const std::size_t max_context = cfg.left_context_frames * dsp.hop_size;
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        Job job;
        job.index = i;
        job.start = Clock::now();
        job.context = std::min(max_context, history.size() / dsp.hop_size * dsp.hop_size);
        audio::AudioBuffer input;
        input.sample_rate = dsp.sample_rate;
        input.samples.assign(history.end() - static_cast<std::ptrdiff_t>(job.context),
                             history.end());
        input.samples.insert(input.samples.end(), chunks[i].samples.begin(),
                             chunks[i].samples.end());
        job.samples = input.size();
        job.features = analyze(bundle, input);
        history.insert(history.end(), chunks[i].samples.begin(), chunks[i].samples.end());
        if (history.size() > max_context) {
          history.erase(history.begin(),
                        history.end() - static_cast<std::ptrdiff_t>(max_context));
        }
        if (!to_model.push(std::move(job))) return;
      }
      to_model.close();
    } catch (...) {
      latch.fail(std::current_exception(), to_model, to_vocoder);
    }
  });

  std::thread model([&] {
    try {
      while (auto job = to_model.pop()) {
        job->mel = predict_mel(bundle, job->features, profile);
        if (!to_vocoder.push(std::move(*job))) return;
      }
      to_vocoder.close();
    } catch (...) {
      latch.fail(std::current_exception(), to_model, to_vocoder);
    }
  });

  try {
    std::size_t expected = 0;
    while (auto job = to_vocoder.pop()) {
      if (job->index != expected++) throw PipelineError("stream stages reordered chunks");
      audio::AudioBuffer out = render(bundle, job->mel, job->samples);
      const std::size_t drop = std::min(job->context, out.size());
      out.samples.erase(out.samples.begin(),
                        out.samples.begin() + static_cast<std::ptrdiff_t>(drop));
      result.chunks[job->index] = std::move(out);
      latencies[job->index] = elapsed_ms(job->start);
    }
  } catch (...) {
    latch.fail(std::current_exception(), to_model, to_vocoder);
  }
  ingest.join();
  model.join();
  latch.rethrow();

  double audio_seconds = 0.0;
  for (const auto& c : chunks) audio_seconds += c.duration_seconds();
  const double wall = elapsed_ms(stream_start) / 1000.0;
  result.report = summarize(std::move(latencies), audio_seconds, wall);
  return result;
}

BenchmarkReport benchmark(const models::ModelBundle& bundle,
                          const audio::AudioBuffer& audio, std::size_t iterations) {
  if (iterations == 0) throw PipelineError("benchmark needs at least one iteration");
  check_bundle(bundle);
  BenchmarkReport report;
  report.clip_seconds = audio.duration_seconds();

  auto run = [&](const std::optional<VoiceProfile>& profile) {
    convert(bundle, audio, profile);  // warmup, discarded
    std::vector<double> latencies;
    latencies.reserve(iterations);
    for (std::size_t i = 0; i < iterations; ++i) {
      auto t0 = Clock::now();
      convert(bundle, audio, profile);
      latencies.push_back(elapsed_ms(t0));
    }
    double wall = std::accumulate(latencies.begin(), latencies.end(), 0.0) / 1000.0;
    return summarize(std::move(latencies), report.clip_seconds * iterations, wall);
  };
  report.with_profile = run(std::nullopt);
  report.precomputed = run(profile_from_audio(bundle, audio));
  return report;
}

}  // namespace acvc::pipeline
