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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "acvc/audio/mel.hpp"
#include "acvc/audio/pitch.hpp"
#include "acvc/audio/resample.hpp"
#include "acvc/audio/stft.hpp"
#include "acvc/audio/wav.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace acvc::audio {
namespace {

using testing::oracle_mel_energy;

using testing::dominant_frequency;
using testing::sine;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("acvc_audio_test_" + name)).string();
}

AudioBuffer make(std::vector<float> s, int rate = 22050) {
  return AudioBuffer{std::move(s), rate};
}

// --- WAV -------------------------------------------------------------------

TEST(WavTest, OneSecondPcm16RoundTrip) {
  AudioBuffer a = make(sine(440, 22050, 22050));
  const std::string path = temp_path("pcm16.wav");
  save_wav(path, a);
  AudioBuffer b = load_wav(path);
  EXPECT_EQ(b.sample_rate, 22050);
  ASSERT_EQ(b.size(), 22050u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.samples[i], a.samples[i], 1e-4);
  std::filesystem::remove(path);
}

TEST(WavTest, Float32RoundTripIsBitExact) {
  AudioBuffer a = make(sine(123, 16000, 1000, 0.9), 16000);
  const std::string path = temp_path("f32.wav");
  save_wav(path, a, WavEncoding::kFloat32);
  AudioBuffer b = load_wav(path);
  EXPECT_EQ(b.sample_rate, 16000);
  EXPECT_EQ(b.samples, a.samples);
  std::filesystem::remove(path);
}

void write_raw(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> header(std::uint16_t format, std::uint16_t channels,
                                  std::uint16_t bits, std::uint32_t data_bytes) {
  std::vector<unsigned char> h;
  auto u16 = [&](std::uint16_t v) { h.push_back(v & 0xFF); h.push_back(v >> 8); };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) h.push_back((v >> (8 * i)) & 0xFF);
  };
  auto tag = [&](const char* t) { h.insert(h.end(), t, t + 4); };
  tag("RIFF"); u32(36 + data_bytes); tag("WAVE");
  tag("fmt "); u32(16); u16(format); u16(channels); u32(22050);
  u32(22050 * channels * bits / 8); u16(channels * bits / 8); u16(bits);
  tag("data"); u32(data_bytes);
  return h;
}

TEST(WavTest, StereoOfIdenticalChannelsEqualsEitherChannel) {
  std::vector<std::int16_t> mono = {0, 1000, -1000, 32767, -32768, 12345};
  auto bytes = header(1, 2, 16, static_cast<std::uint32_t>(mono.size() * 4));
  for (std::int16_t s : mono) {
    for (int c = 0; c < 2; ++c) {
      bytes.push_back(static_cast<std::uint16_t>(s) & 0xFF);
      bytes.push_back(static_cast<std::uint16_t>(s) >> 8);
    }
  }
  const std::string path = temp_path("stereo.wav");
  write_raw(path, bytes);
  AudioBuffer b = load_wav(path);
  ASSERT_EQ(b.size(), mono.size());
  for (std::size_t i = 0; i < mono.size(); ++i) {
    EXPECT_EQ(b.samples[i], static_cast<float>(mono[i] / 32768.0));
  }
  std::filesystem::remove(path);
}

TEST(WavTest, ErrorsAreDistinct) {
  auto kind_of = [](const std::string& path) {
    try {
      load_wav(path);
    } catch (const WavError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << path;
    return WavError::Kind::kIo;
  };
  EXPECT_EQ(kind_of(temp_path("does_not_exist.wav")), WavError::Kind::kMissingFile);

  const std::string trunc = temp_path("trunc.wav");
  auto h = header(1, 1, 16, 100);
  h.resize(10);
  write_raw(trunc, h);
  EXPECT_EQ(kind_of(trunc), WavError::Kind::kMalformedHeader);

  const std::string no_data = temp_path("nodata.wav");
  h = header(1, 1, 16, 0);
  h.resize(36);
  write_raw(no_data, h);
  EXPECT_EQ(kind_of(no_data), WavError::Kind::kMalformedHeader);

  const std::string pcm8 = temp_path("pcm8.wav");
  h = header(1, 1, 8, 4);
  h.insert(h.end(), {1, 2, 3, 4});
  write_raw(pcm8, h);
  EXPECT_EQ(kind_of(pcm8), WavError::Kind::kUnsupportedEncoding);
  for (auto& p : {trunc, no_data, pcm8}) std::filesystem::remove(p);
}

// --- Resampling --------------------------------------------------------------

TEST(ResampleTest, LengthFollowsRateRatio) {
  AudioBuffer a = make(sine(100, 22050, 22050));
  EXPECT_EQ(resample(a, 16000).size(), 16000u);
  EXPECT_EQ(resample(make(std::vector<float>(1000)), 16000).size(),
            static_cast<std::size_t>(std::llround(1000 * 16000.0 / 22050)));
  EXPECT_EQ(resample(make({}), 16000).size(), 0u);
}

TEST(ResampleTest, SameRateIsBitIdentical) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> d(-1, 1);
  std::vector<float> s(777);
  for (auto& v : s) v = d(rng);
  AudioBuffer a = make(s);
  EXPECT_EQ(resample(a, 22050).samples, a.samples);
}

TEST(ResampleTest, PreservesToneFrequency) {
  AudioBuffer a = make(sine(100, 22050, 22050));
  AudioBuffer b = resample(a, 16000);
  const double bin = 16000.0 / 4096;
  EXPECT_NEAR(dominant_frequency(b.samples, 16000), 100.0, bin);
}

TEST(ResampleTest, RoundTripPreservesDominantFrequency) {
  const double bin = 22050.0 / 4096;
  for (double f : {150.0, 440.0, 1234.0, 3000.0}) {
    AudioBuffer a = make(sine(f, 22050, 8192));
    AudioBuffer back = resample(resample(a, 16000), 22050);
    EXPECT_NEAR(dominant_frequency(back.samples, 22050),
                dominant_frequency(a.samples, 22050), bin)
        << f;
  }
}

TEST(ResampleTest, RejectsNonPositiveRate) {
  AudioBuffer a = make(std::vector<float>(10));
  EXPECT_THROW(resample(a, 0), AudioError);
  EXPECT_THROW(resample(a, -16000), AudioError);
}

// --- Mel spectrogram ---------------------------------------------------------

TEST(MelTest, FiveSecondsGives431Frames) {
  DspConfig cfg;
  MelSpectrogram m = mel_spectrogram(make(std::vector<float>(5 * 22050)), cfg);
  EXPECT_EQ(m.n_mels, 80u);
  EXPECT_EQ(m.frames, 431u);
  EXPECT_EQ(m.bands.size(), 80u * 431u);
}

TEST(MelTest, SilenceIsAtTheFloor) {
  DspConfig cfg;
  MelSpectrogram m = mel_spectrogram(make(std::vector<float>(3000)), cfg);
  for (double v : m.bands) EXPECT_EQ(v, std::log(cfg.log_floor));
}

TEST(MelTest, ToneLandsInItsBand) {
  DspConfig cfg;
  MelSpectrogram m = mel_spectrogram(make(sine(1000, 22050, 22050)), cfg);
  // Band whose triangle peaks closest to 1 kHz.
  const double top = hz_to_mel(cfg.sample_rate / 2.0);
  std::size_t expect = 0;
  double best = 1e9;
  for (std::size_t b = 0; b < cfg.n_mels; ++b) {
    double centre = mel_to_hz(top * (b + 1) / (cfg.n_mels + 1));
    if (std::fabs(centre - 1000.0) < best) {
      best = std::fabs(centre - 1000.0);
      expect = b;
    }
  }
  for (std::size_t t = 2; t + 2 < m.frames; ++t) {
    std::size_t arg = 0;
    for (std::size_t b = 1; b < m.n_mels; ++b) {
      if (m.at(b, t) > m.at(arg, t)) arg = b;
    }
    EXPECT_EQ(arg, expect) << "frame " << t;
  }
}

TEST(MelTest, MatchesDirectDftOracle) {
  DspConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 3000);
  std::uniform_real_distribution<float> amp(-0.8f, 0.8f);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<float> x(trial == 0 ? 1 : len(rng));
    for (auto& v : x) v = amp(rng);
    MelSpectrogram m = mel_spectrogram(make(x), cfg);
    std::vector<double> ref = oracle_mel_energy(x, cfg);
    ASSERT_EQ(ref.size(), m.bands.size());
    for (std::size_t t = 0; t < m.frames; ++t) {
      for (std::size_t b = 0; b < m.n_mels; ++b) {
        double r = std::max(ref[t * m.n_mels + b], cfg.log_floor);
        double got = std::exp(m.at(b, t));
        EXPECT_LE(std::fabs(got - r), 1e-4 * r) << "len " << x.size();
      }
    }
  }
}

TEST(MelTest, FrameCountLawForRandomLengths) {
  DspConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> len(1, 20000);
  std::vector<std::size_t> lengths = {1, 2, 255, 256, 257, 511, 512, 1024};
  for (int i = 0; i < 30; ++i) lengths.push_back(len(rng));
  for (std::size_t n : lengths) {
    std::vector<float> x = sine(300, 22050, n, 0.3);
    EXPECT_EQ(mel_spectrogram(make(x), cfg).frames, n / 256 + 1) << n;
  }
}

TEST(MelTest, DeterministicAndMonotoneInGain) {
  DspConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> d(-0.4f, 0.4f);
  std::vector<float> x(4000);
  for (auto& v : x) v = d(rng);
  MelSpectrogram a = mel_spectrogram(make(x), cfg);
  MelSpectrogram b = mel_spectrogram(make(x), cfg);
  EXPECT_EQ(a.bands, b.bands);
  for (float g : {1.5f, 2.0f}) {
    std::vector<float> y = x;
    for (auto& v : y) v *= g;
    MelSpectrogram c = mel_spectrogram(make(y), cfg);
    for (std::size_t i = 0; i < a.bands.size(); ++i) EXPECT_GE(c.bands[i], a.bands[i]);
  }
}

TEST(MelTest, RejectsBadInput) {
  DspConfig cfg;
  EXPECT_THROW(mel_spectrogram(make({}), cfg), AudioError);
  EXPECT_THROW(mel_spectrogram(make({0.1f}, 16000), cfg), AudioError);
  DspConfig bad = cfg;
  bad.hop_size = 2048;
  EXPECT_THROW(mel_spectrogram(make({0.1f}), bad), AudioError);
  bad = cfg;
  bad.f_max = 20000;
  EXPECT_THROW(mel_spectrogram(make({0.1f}), bad), AudioError);
}

TEST(StftTest, InverseReconstructsInterior) {
  DspConfig cfg;
  std::vector<float> x = sine(330, 22050, 8000, 0.5);
  auto spec = stft(x, cfg);
  std::vector<double> y = istft(spec, cfg.frame_count(x.size()), cfg);
  ASSERT_EQ(y.size(), (cfg.frame_count(x.size()) - 1) * cfg.hop_size);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-9);
}

// --- Pitch -------------------------------------------------------------------

TEST(PitchTest, RecoversA220HzSine) {
  DspConfig cfg;
  PitchContour p = extract_pitch(make(sine(220, 22050, 22050)), cfg);
  std::vector<double> voiced;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p.voiced[t]) voiced.push_back(p.f0[t]);
  }
  ASSERT_FALSE(voiced.empty());
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2, voiced.end());
  EXPECT_NEAR(voiced[voiced.size() / 2], 220.0, 3.0);
}

TEST(PitchTest, SilenceAndQuietNoiseAreUnvoiced) {
  DspConfig cfg;
  PitchContour s = extract_pitch(make(std::vector<float>(11025)), cfg);
  std::mt19937_64 rng(5);
  std::normal_distribution<float> d(0.0f, 0.01f);
  std::vector<float> noise(11025);
  for (auto& v : noise) v = d(rng);
  PitchContour n = extract_pitch(make(noise), cfg);
  for (const auto* p : {&s, &n}) {
    for (std::size_t t = 0; t < p->size(); ++t) {
      EXPECT_FALSE(p->voiced[t]);
      EXPECT_EQ(p->f0[t], 0.0);
    }
  }
}

TEST(PitchTest, MedianFilterRemovesOctaveOutlier) {
  DspConfig cfg;
  PitchContour raw = estimate_raw_f0(make(sine(220, 22050, 22050)), cfg);
  const std::size_t mid = raw.size() / 2;
  ASSERT_TRUE(raw.voiced[mid]);
  raw.f0[mid] = 440.0;
  PitchContour smooth = smooth_contour(raw, 5);
  EXPECT_NEAR(smooth.f0[mid], 220.0, 3.0);
}

TEST(PitchTest, SineSweepWithinThreeHertz) {
  DspConfig cfg;
  for (double f = 80.0; f <= 350.0; f += 15.0) {
    PitchContour p = extract_pitch(make(sine(f, 22050, 22050, 0.5, 0.3)), cfg);
    std::size_t interior = 0, good = 0;
    for (std::size_t t = 3; t + 3 < p.size(); ++t) {
      ++interior;
      if (p.voiced[t] && std::fabs(p.f0[t] - f) <= 3.0) ++good;
    }
    EXPECT_GE(good, 0.9 * interior) << f << " Hz";
  }
}

TEST(PitchTest, ContourInvariants) {
  DspConfig cfg;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> d(-0.5f, 0.5f);
  std::vector<float> x = sine(180, 22050, 9000, 0.4);
  for (std::size_t i = 4000; i < 6000; ++i) x[i] = d(rng);
  PitchContour p = extract_pitch(make(x), cfg, 70.0, 300.0);
  EXPECT_EQ(p.size(), cfg.frame_count(x.size()));
  for (std::size_t t = 0; t < p.size(); ++t) {
    EXPECT_EQ(p.voiced[t], p.f0[t] != 0.0);
    if (p.voiced[t]) {
      EXPECT_GE(p.f0[t], 70.0);
      EXPECT_LE(p.f0[t], 300.0);
    }
  }
}

TEST(PitchTest, RejectsInvalidRange) {
  DspConfig cfg;
  AudioBuffer a = make(std::vector<float>(1000));
  EXPECT_THROW(extract_pitch(a, cfg, 400.0, 60.0), AudioError);
  EXPECT_THROW(extract_pitch(a, cfg, 60.0, 20000.0), AudioError);
  EXPECT_THROW(extract_pitch(make({}), cfg), AudioError);
}

}  // namespace
}  // namespace acvc::audio
