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


#include "acvc/io/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "acvc/audio/wav.hpp"

namespace acvc::io {

namespace {

constexpr std::array<const char*, 8> kAdjectives = {
    "red", "big", "old", "soft", "dark", "warm", "cold", "tall"};
constexpr std::array<const char*, 8> kNouns = {
    "cat", "dog", "sun", "boat", "tree", "bird", "lamp", "road"};

constexpr double kLetterSeconds = 0.07;
constexpr double kPauseSeconds = 0.06;
constexpr double kEdgeSeconds = 0.05;

bool is_fricative(char c) {
  return c == 's' || c == 'f' || c == 'h' || c == 'z' || c == 'x' || c == 'c';
}

// Nominal formants of a letter before speaker and accent adjustments.
std::array<double, 3> letter_formants(char c) {
  const int i = c - 'a';
  return {250.0 + 25.0 * ((i * 7) % 26), 800.0 + 60.0 * ((i * 11) % 26),
          2400.0 + 20.0 * i};
}

double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Resonator {
 public:
  double step(double x, double freq, double bandwidth, double rate) {
    double r = std::exp(-std::numbers::pi * bandwidth / rate);
    double b1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / rate);
    double b2 = -r * r;
    // Unity gain at the centre frequency.
    double gain = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(4.0 * std::numbers::pi * freq / rate) + r * r);
    double y = gain * x + b1 * y1_ + b2 * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double y1_ = 0.0, y2_ = 0.0;
};

std::string phrase(std::uint64_t seed, std::size_t speaker, std::size_t utt) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(speaker),
                    static_cast<std::uint64_t>(utt), std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  return std::string(kAdjectives[rng() % kAdjectives.size()]) + " " +
         kNouns[rng() % kNouns.size()];
}

audio::AudioBuffer render(const std::string& text, const VoiceParams& v,
                          int rate, std::mt19937_64& rng) {
  std::vector<double> out;
  auto seconds = [rate](double s) {
    return static_cast<std::size_t>(std::lround(s * rate));
  };
  out.resize(seconds(kEdgeSeconds), 0.0);
  Resonator r1, r2, r3;
  double phase = 0.0, previous_saw = 0.0;
  std::array<double, 3> current = letter_formants(text.empty() ? 'a' : text[0]);
  const double smooth = 1.0 - std::exp(-1.0 / (0.008 * rate));
  for (char c : text) {
    if (c == ' ') {
      out.resize(out.size() + seconds(kPauseSeconds * v.duration_scale), 0.0);
      continue;
    }
    const std::size_t n = seconds(kLetterSeconds * v.duration_scale);
    std::array<double, 3> target = letter_formants(c);
    target[1] += v.f2_shift;
    for (auto& f : target) f *= v.formant_scale;
    const bool noisy = is_fricative(c);
    const std::size_t ramp = std::min<std::size_t>(seconds(0.01), n / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) current[k] += smooth * (target[k] - current[k]);
      double source;
      if (noisy) {
        source = 0.6 * (2.0 * uniform(rng) - 1.0);
      } else {
        phase += v.f0 / rate;
        phase -= std::floor(phase);
        // Differentiated sawtooth: one pulse per period, flat spectrum.
        double saw = 2.0 * phase - 1.0;
        source = -(saw - previous_saw) + 0.02 * (2.0 * uniform(rng) - 1.0);
        previous_saw = saw;
      }
      double y = r1.step(source, current[0], 90.0, rate) +
                 0.7 * r2.step(source, current[1], 110.0, rate) +
                 0.4 * r3.step(source, current[2], 160.0, rate);
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
      if (n - 1 - i < ramp) {
        env = 0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) / ramp);
      }
      out.push_back(env * y);
    }
  }
  out.resize(out.size() + seconds(kEdgeSeconds), 0.0);
  double peak = 0.0;
  for (double s : out) peak = std::max(peak, std::abs(s));
  audio::AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    a.samples[i] = static_cast<float>(peak > 0.0 ? 0.5 * out[i] / peak : 0.0);
  }
  return a;
}

}  // namespace

VoiceParams voice_params(std::size_t speaker, std::size_t accent) {
  VoiceParams v;
  const bool male = speaker % 2 == 1;
  v.f0 = (male ? 105.0 : 185.0) + 12.0 * static_cast<double>(speaker / 2);
  v.formant_scale = (male ? 0.92 : 1.06) + 0.03 * static_cast<double>(speaker / 2);
  v.f2_shift = 250.0 * static_cast<double>(accent);
  v.duration_scale = 1.0 + 0.2 * static_cast<double>(accent);
  return v;
}

std::vector<SyntheticUtterance> synthesize_corpus(const CorpusSpec& spec,
                                                  std::uint64_t seed) {
  if (spec.sample_rate <= 0) {
    throw std::invalid_argument("corpus sample rate must be positive");
  }
  std::vector<SyntheticUtterance> out;
  for (std::size_t s = 0; s < spec.speakers; ++s) {
    for (std::size_t a = 0; a < spec.accents; ++a) {
      for (std::size_t u = 0; u < spec.utterances; ++u) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(a),
                          static_cast<std::uint64_t>(u)};
        std::mt19937_64 rng(seq);
        SyntheticUtterance utt;
        utt.record.text = phrase(seed, s, u);
        utt.audio = render(utt.record.text, voice_params(s, a), spec.sample_rate, rng);
        utt.record.audio_filepath = "spk" + std::to_string(s) + "_acc" +
                                    std::to_string(a) + "_utt" +
                                    std::to_string(u) + ".wav";
        utt.record.accent = a;
        utt.record.gender = gender_name(s % 2);
        utt.record.speaker = "spk" + std::to_string(s);
        utt.record.duration = utt.audio.duration_seconds();
        out.push_back(std::move(utt));
      }
    }
  }
  return out;
}

std::vector<ManifestRecord> generate_synthetic_corpus(const CorpusSpec& spec,
                                                      std::uint64_t seed,
                                                      const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create corpus directory " + dir);
  }
  std::vector<ManifestRecord> records;
  for (auto& utt : synthesize_corpus(spec, seed)) {
    audio::save_wav(dir + "/" + utt.record.audio_filepath, utt.audio);
    records.push_back(utt.record);
  }
  write_manifest(dir + "/manifest.jsonl", records);
  return records;
}

}  // namespace acvc::io
