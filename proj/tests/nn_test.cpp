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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "acvc/autodiff/grad_check.hpp"
#include "acvc/nn/blocks.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace acvc::nn {
namespace {

using testing::block_grad_error;

using ad::Tensor;
using testing::random_tensor;

const ForwardContext kInference{};

TEST(ParamStoreTest, NamesCountsAndPrecision) {
  ParamStore store(1);
  Tensor w = store.parameter("w", {3, 4}, 0.5);
  store.buffer("stat", {4}, 1.0);
  EXPECT_THROW(store.parameter("w", {1}, 1.0), ParamError);
  EXPECT_EQ(store.parameter_count(), 12u);
  for (double v : w.data()) {
    EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
  }
  EXPECT_TRUE(w.requires_grad());
  store.set_frozen(true);
  EXPECT_EQ(store.trainable_count(), 0u);
  EXPECT_FALSE(w.requires_grad());
  EXPECT_FALSE(store.find("stat").requires_grad());
  EXPECT_THROW(store.find("missing"), ParamError);
}

TEST(ParamStoreTest, SameSeedSameValues) {
  ParamStore a(7), b(7);
  EXPECT_EQ(a.parameter("x", {10}, 1.0).to_vector(),
            b.parameter("x", {10}, 1.0).to_vector());
}

// --- Jasper -----------------------------------------------------------------

TEST(JasperTest, ToyShapeAndZeroInput) {
  ParamStore store(2);
  BlockPreset p = toy_preset();
  JasperStack jasper(store, "jasper", 80, p.jasper);
  Tensor y = jasper(Tensor::zeros({1, 80, 20}), kInference);
  EXPECT_EQ(y.shape(), (ad::Shape{1, p.jasper.widths.back(), 20}));
  Tensor y2 = jasper(Tensor::zeros({1, 80, 20}), kInference);
  EXPECT_EQ(y.to_vector(), y2.to_vector());
  // No conv bias and a zero batch-norm shift: zero in, zero out.
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(JasperTest, GradCheck) {
  std::mt19937_64 rng(3);
  ParamStore store(3, Precision::kFloat64);
  JasperConfig cfg{{4, 6, 6}, {3, 5, 3}, 3};
  JasperStack jasper(store, "jasper", 5, cfg);
  Tensor x = random_tensor({1, 5, 7}, rng);
  EXPECT_LT(block_grad_error(
                [&](const Tensor& v) { return jasper(v, kInference); }, x,
                store, rng),
            1e-4);
}

TEST(JasperTest, TrainingModeUpdatesStatisticsAndIsSeedDeterministic) {
  ParamStore store(4);
  JasperStack jasper(store, "jasper", 80, toy_preset().jasper);
  std::mt19937_64 data(5);
  Tensor x = random_tensor({1, 80, 12}, data);
  std::vector<double> before =
      store.find("jasper.block0.sub0.bn.running_mean").to_vector();
  std::mt19937_64 r1(9), r2(9);
  Tensor a = jasper(x, {.training = true, .rng = &r1});
  EXPECT_NE(store.find("jasper.block0.sub0.bn.running_mean").to_vector(),
            before);
  ParamStore store2(4);
  JasperStack jasper2(store2, "jasper", 80, toy_preset().jasper);
  Tensor b = jasper2(x, {.training = true, .rng = &r2});
  EXPECT_EQ(a.to_vector(), b.to_vector());
  EXPECT_NE(a.to_vector(), jasper(x, kInference).to_vector());
}

// --- Attentive pooling --------------------------------------------------------

TEST(PoolingTest, ConstantFeaturesGiveMeanAndZeroStd) {
  ParamStore store(6);
  AttentivePoolingDecoder dec(store, "dec", 4, {8, 192}, 40);
  std::vector<double> frame = {0.3, -1.2, 2.0, 0.0};
  std::vector<double> v;
  for (int t = 0; t < 9; ++t) v.insert(v.end(), frame.begin(), frame.end());
  auto out = dec(Tensor::from_vector({9, 4}, v));
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(out.pooled.data()[c], frame[c], 1e-12);
    EXPECT_NEAR(out.pooled.data()[4 + c], 0.0, 1e-9);
  }
  EXPECT_EQ(out.embedding.shape(), (ad::Shape{192}));
  EXPECT_EQ(out.logits.shape(), (ad::Shape{40}));
}

TEST(PoolingTest, SingleFrame) {
  ParamStore store(7);
  AttentivePoolingDecoder dec(store, "dec", 3, {8, 192}, 2);
  auto out = dec(Tensor::from_vector({1, 3}, {1.0, -2.0, 0.5}));
  EXPECT_DOUBLE_EQ(out.weights.data()[0], 1.0);
  EXPECT_DOUBLE_EQ(out.pooled.data()[0], 1.0);
  EXPECT_DOUBLE_EQ(out.pooled.data()[1], -2.0);
  for (std::size_t c = 3; c < 6; ++c) {
    EXPECT_NEAR(out.pooled.data()[c], 0.0, 1e-12);
  }
  EXPECT_THROW(dec(Tensor::zeros({0, 3})), ad::ShapeError);
}

TEST(PoolingTest, DuplicatedFrameRenormalizesWeights) {
  // Scores depend on content only, so if [a, b] gets weights (wa, wb) with
  // r = wb / wa, then [a, b, b] weighs a by 1 / (1 + 2r) and each b by
  // r / (1 + 2r).
  std::mt19937_64 rng(8);
  ParamStore store(8);
  AttentivePoolingDecoder dec(store, "dec", 5, {8, 192}, 3);
  Tensor ab = random_tensor({2, 5}, rng);
  std::vector<double> abb = ab.to_vector();
  abb.insert(abb.end(), abb.begin() + 5, abb.begin() + 10);
  auto o2 = dec(ab);
  auto o3 = dec(Tensor::from_vector({3, 5}, abb));
  const double r = o2.weights.data()[1] / o2.weights.data()[0];
  EXPECT_NEAR(o3.weights.data()[0], 1.0 / (1.0 + 2.0 * r), 1e-12);
  EXPECT_NEAR(o3.weights.data()[1], r / (1.0 + 2.0 * r), 1e-12);
  EXPECT_NEAR(o3.weights.data()[2], r / (1.0 + 2.0 * r), 1e-12);
  for (std::size_t c = 0; c < 5; ++c) {
    double a = ab.data()[c], b = ab.data()[5 + c];
    EXPECT_NEAR(o3.pooled.data()[c], (a + 2.0 * r * b) / (1.0 + 2.0 * r),
                1e-12);
  }
}

TEST(PoolingTest, GradCheck) {
  std::mt19937_64 rng(9);
  ParamStore store(9, Precision::kFloat64);
  AttentivePoolingDecoder dec(store, "dec", 6, {4, 192}, 5);
  Tensor x = random_tensor({7, 6}, rng);
  auto f = [&](const Tensor& v) {
    auto o = dec(v);
    Tensor parts[] = {o.embedding, o.logits};
    return ad::concat(parts, 0);
  };
  EXPECT_LT(block_grad_error(f, x, store, rng), 1e-4);
}

// --- Sinc -----------------------------------------------------------------------

TEST(SincTest, CoveringChannelDominatesByTwentyDecibels) {
  ParamStore store(10);
  SincConfig cfg = toy_preset().sinc;
  SincConv sinc(store, "sinc", cfg);
  for (std::size_t target : {cfg.channels / 2, cfg.channels - 1}) {
    auto [f1, f2] = sinc.band(target);
    const double tone = 0.5 * (f1 + f2);
    std::vector<float> s = testing::sine(tone, 16000, 8000);
    Tensor x = Tensor::from_vector({s.size()},
                                   std::vector<double>(s.begin(), s.end()));
    Tensor y = sinc.filtered(x);
    const std::size_t t = y.dim(2);
    EXPECT_EQ(t, sinc.output_length(s.size()));
    EXPECT_EQ(t, (s.size() - cfg.kernel) / cfg.stride + 1);
    std::vector<double> energy(cfg.channels, 0.0);
    for (std::size_t c = 0; c < cfg.channels; ++c) {
      for (std::size_t i = 0; i < t; ++i) {
        double v = y.data()[c * t + i];
        energy[c] += v * v;
      }
    }
    for (std::size_t c = 0; c < cfg.channels; ++c) {
      auto [lo, hi] = sinc.band(c);
      if (tone >= lo && tone <= hi) continue;
      // Skip neighbours whose transition band reaches the tone.
      const double transition = 4.0 * cfg.sample_rate / cfg.kernel;
      if (tone > lo - transition && tone < hi + transition) continue;
      EXPECT_GT(10.0 * std::log10(energy[target] / energy[c]), 20.0)
          << "target " << target << " channel " << c;
    }
  }
}

TEST(SincTest, BandwidthFloorAndNyquistClamp) {
  ParamStore store(11);
  SincConfig cfg = toy_preset().sinc;
  SincConv sinc(store, "sinc", cfg);
  Tensor low = store.find("sinc.low_hz");
  Tensor band = store.find("sinc.band_hz");
  low.mutable_data()[0] = 0.0;
  band.mutable_data()[0] = 0.0;
  low.mutable_data()[1] = 1e6;
  band.mutable_data()[1] = -1e6;
  for (std::size_t c : {0u, 1u}) {
    auto [f1, f2] = sinc.band(c);
    EXPECT_GT(f1, 0.0);
    EXPECT_LE(f2, cfg.sample_rate / 2.0);
    EXPECT_GE(f2 - f1, cfg.min_band_hz - 1e-9);
  }
}

TEST(SincTest, GradCheckOverCutoffs) {
  std::mt19937_64 rng(12);
  ParamStore store(12, Precision::kFloat64);
  SincConfig cfg{4, 31, 5, 16000, 50.0, 50.0};
  SincConv sinc(store, "sinc", cfg);
  // The top channel starts exactly at the Nyquist clamp, a kink; move it off.
  Tensor band = store.find("sinc.band_hz");
  band.mutable_data()[cfg.channels - 1] -= 300.0;
  Tensor x = random_tensor({200}, rng);
  EXPECT_LT(block_grad_error([&](const Tensor& v) { return sinc(v); }, x,
                             store, rng),
            1e-4);
}

// --- X-vector -------------------------------------------------------------------

TEST(XVectorTest, ConstantFeaturesHaveZeroStd) {
  std::vector<double> v;
  for (int c = 0; c < 3; ++c) {
    for (int t = 0; t < 10; ++t) v.push_back(0.7 * c - 0.2);
  }
  Tensor pooled =
      XVectorStack::statistics_pooling(Tensor::from_vector({1, 3, 10}, v));
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(pooled.data()[c], 0.7 * c - 0.2, 1e-12);
    EXPECT_NEAR(pooled.data()[3 + c], 0.0, 1e-9);
  }
}

TEST(XVectorTest, ToyShapeAndMinimumLength) {
  EXPECT_EQ(XVectorStack::receptive_field(), 15u);
  ParamStore store(13);
  BlockPreset p = toy_preset();
  XVectorStack xv(store, "xv", p.sinc.channels, p.xvector);
  std::mt19937_64 rng(13);
  Tensor y = xv(random_tensor({1, p.sinc.channels, 15}, rng), kInference);
  EXPECT_EQ(y.shape(), (ad::Shape{512}));
  EXPECT_THROW(xv(random_tensor({1, p.sinc.channels, 14}, rng), kInference),
               ad::ShapeError);
}

TEST(XVectorTest, GradCheck) {
  std::mt19937_64 rng(14);
  ParamStore store(14, Precision::kFloat64);
  XVectorStack xv(store, "xv", 3, {{4, 4, 4, 4, 6}, 8});
  Tensor x = random_tensor({1, 3, 18}, rng);
  EXPECT_LT(block_grad_error([&](const Tensor& v) { return xv(v, kInference); },
                             x, store, rng),
            1e-4);
}

// --- Attention, Conformer, FFT ------------------------------------------------------

TEST(AttentionTest, SelfOnlyMaskIsPerPosition) {
  std::mt19937_64 rng(15);
  ParamStore store(15);
  MultiHeadAttention mha(store, "mha", 8, 2);
  const std::size_t t = 6;
  Tensor x = random_tensor({t, 8}, rng);
  std::vector<std::uint8_t> mask(t * t, 0);
  for (std::size_t i = 0; i < t; ++i) mask[i * t + i] = 1;
  Tensor y = mha(x, mask);
  for (std::size_t i = 0; i < t; ++i) {
    Tensor row = mha(ad::slice(x, 0, i, 1));
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(y.data()[i * 8 + j], row.data()[j], 1e-12);
    }
  }
  Tensor free = mha(x);
  double diff = 0.0;
  for (std::size_t i = 0; i < y.numel(); ++i) {
    diff = std::max(diff, std::fabs(free.data()[i] - y.data()[i]));
  }
  EXPECT_GT(diff, 1e-6);
}

TEST(ConformerTest, ShapeAndGradCheck) {
  std::mt19937_64 rng(16);
  ParamStore store(16, Precision::kFloat64);
  ConformerBlock block(store, "conformer", {8, 2, 12, 3, 1});
  Tensor x = random_tensor({5, 8}, rng);
  EXPECT_EQ(block(x, kInference).shape(), x.shape());
  EXPECT_LT(block_grad_error(
                [&](const Tensor& v) { return block(v, kInference); }, x, store,
                rng),
            1e-4);
}

TEST(FftTest, ZeroStacksIsIdentity) {
  ParamStore store(17);
  FftStack stack(store, "fft", toy_preset().sts, 0);
  std::mt19937_64 rng(17);
  Tensor x = random_tensor({4, 32}, rng);
  EXPECT_EQ(stack(x, kInference).to_vector(), x.to_vector());
  EXPECT_EQ(store.parameter_count(), 0u);
}

TEST(FftTest, GradCheck) {
  std::mt19937_64 rng(18);
  ParamStore store(18, Precision::kFloat64);
  FftStack stack(store, "fft", {8, 2, 12, 3}, 2);
  Tensor x = random_tensor({5, 8}, rng);
  EXPECT_LT(block_grad_error(
                [&](const Tensor& v) { return stack(v, kInference); }, x, store,
                rng),
            1e-4);
}

// --- Time-length laws ---------------------------------------------------------------

TEST(LengthLawTest, SubsampleAndUpsampleExamples) {
  ParamStore store(19);
  Subsample4 sub(store, "sub", 6, 5);
  for (auto [t, expect] : {std::pair<std::size_t, std::size_t>{16, 4},
                           {17, 5},
                           {1, 1}}) {
    EXPECT_EQ(sub(Tensor::zeros({t, 6})).shape(), (ad::Shape{expect, 5}));
  }
  Upsample4 up(store, "up", 5, 3);
  EXPECT_EQ(up(Tensor::zeros({5, 5})).shape(), (ad::Shape{20, 3}));
}

TEST(LengthLawTest, AllBlocksOverLengthsOneToSixtyFour) {
  ParamStore store(20);
  BlockPreset p = toy_preset();
  JasperStack jasper(store, "jasper", 80, p.jasper);
  ConformerBlock conformer(store, "conformer", p.conformer);
  FftStack fft(store, "fft", p.sts, 1);
  Subsample4 sub(store, "sub", 80, 32);
  Upsample4 up(store, "up", 32, 32);
  std::mt19937_64 rng(20);
  for (std::size_t t = 1; t <= 64; ++t) {
    EXPECT_EQ(jasper(random_tensor({1, 80, t}, rng), kInference).dim(2), t);
    Tensor d = random_tensor({t, 32}, rng);
    EXPECT_EQ(conformer(d, kInference).shape(), d.shape());
    EXPECT_EQ(fft(d, kInference).shape(), d.shape());
    Tensor s = sub(random_tensor({t, 80}, rng));
    EXPECT_EQ(s.dim(0), (t + 3) / 4);
    EXPECT_EQ(s.dim(0), Subsample4::output_length(t));
    EXPECT_EQ(up(s).dim(0), 4 * ((t + 3) / 4));
    EXPECT_GE(up(s).dim(0), t);
    EXPECT_EQ(up(d).dim(0), 4 * t);
  }
}

TEST(LengthLawTest, ResamplingGradChecks) {
  std::mt19937_64 rng(21);
  ParamStore up_store(21, Precision::kFloat64);
  Upsample4 up(up_store, "up", 3, 4);
  Tensor x = random_tensor({3, 3}, rng);
  EXPECT_LT(block_grad_error([&](const Tensor& v) { return up(v); }, x,
                             up_store, rng),
            1e-4);
  ParamStore sub_store(22, Precision::kFloat64);
  Subsample4 sub(sub_store, "sub", 3, 4);
  Tensor y = random_tensor({9, 3}, rng);
  EXPECT_LT(block_grad_error([&](const Tensor& v) { return sub(v); }, y,
                             sub_store, rng),
            1e-4);
}

// --- Condition ----------------------------------------------------------------------

TEST(ConditionTest, ZeroEmbeddingAddsBiasOnly) {
  ParamStore store(23);
  Condition cond(store, "cond", 192, 16);
  std::mt19937_64 rng(23);
  Tensor x = random_tensor({7, 16}, rng);
  Tensor y = cond(x, Tensor::zeros({192}));
  const Tensor& bias = store.find("cond.projection.bias");
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t j = 0; j < 16; ++j) {
      EXPECT_EQ(y.data()[t * 16 + j], x.data()[t * 16 + j] + bias.data()[j]);
    }
  }
}

TEST(ConditionTest, DistinctEmbeddingsDifferAtEveryFrame) {
  ParamStore store(24);
  Condition cond(store, "cond", 12, 16);  // full-rank 12 -> 16 projection
  std::mt19937_64 rng(24);
  Tensor x = random_tensor({5, 16}, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = random_tensor({12}, rng), b = random_tensor({12}, rng);
    Tensor ya = cond(x, a), yb = cond(x, b);
    for (std::size_t t = 0; t < 5; ++t) {
      double diff = 0.0;
      for (std::size_t j = 0; j < 16; ++j) {
        diff += std::fabs(ya.data()[t * 16 + j] - yb.data()[t * 16 + j]);
      }
      EXPECT_GT(diff, 1e-9);
    }
  }
}

TEST(ConditionTest, CommutesWithFramePermutation) {
  ParamStore store(25);
  Condition cond(store, "cond", 8, 4);
  std::mt19937_64 rng(25);
  Tensor x = random_tensor({6, 4}, rng);
  Tensor e = random_tensor({8}, rng);
  std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  std::vector<double> px;
  for (std::size_t p : perm) {
    for (std::size_t j = 0; j < 4; ++j) px.push_back(x.data()[p * 4 + j]);
  }
  Tensor y = cond(x, e);
  Tensor py = cond(Tensor::from_vector({6, 4}, px), e);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(py.data()[i * 4 + j], y.data()[perm[i] * 4 + j]);
    }
  }
  EXPECT_THROW(cond(x, Tensor::zeros({7})), ad::ShapeError);
}

TEST(ConditionTest, GradCheck) {
  std::mt19937_64 rng(26);
  ParamStore store(26, Precision::kFloat64);
  Condition cond(store, "cond", 6, 5);
  Tensor x = random_tensor({4, 5}, rng);
  Tensor e = random_tensor({6}, rng);
  EXPECT_LT(block_grad_error([&](const Tensor& v) { return cond(x, v); }, e,
                             store, rng),
            1e-4);
}

}  // namespace
}  // namespace acvc::nn
