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
#include <span>
#include <string>
#include <vector>

#include "acvc/autodiff/ops.hpp"
#include "acvc/nn/layers.hpp"
#include "acvc/nn/params.hpp"
#include "acvc/nn/preset.hpp"

namespace acvc::nn {

// Residual blocks of conv-BN-relu-dropout sub-blocks with same padding.
// [1 x C_in x T] -> [1 x widths.back() x T].
class JasperStack {
 public:
  JasperStack() = default;
  JasperStack(ParamStore& store, const std::string& name, std::size_t in,
              const JasperConfig& cfg);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx) const;
  std::size_t out_channels() const { return out_; }

 private:
  struct Block {
    std::vector<Conv1d> convs;
    std::vector<BatchNorm1d> norms;
    Conv1d residual;
    BatchNorm1d residual_norm;
  };
  std::vector<Block> blocks_;
  std::size_t out_ = 0;
};

// Attentive statistics pooling followed by norm, a 192-d projection (the
// embedding) and a class head.
class AttentivePoolingDecoder {
 public:
  struct Output {
    ad::Tensor weights;    // [T] attention over frames
    ad::Tensor pooled;     // [1 x 2C] weighted mean then weighted std
    ad::Tensor embedding;  // [embedding_dim]
    ad::Tensor logits;     // [classes]
  };

  AttentivePoolingDecoder() = default;
  AttentivePoolingDecoder(ParamStore& store, const std::string& name,
                          std::size_t channels, const PoolingDecoderConfig& cfg,
                          std::size_t classes);
  // frames: [T x C]
  Output operator()(const ad::Tensor& frames) const;

  static constexpr double kStdEps = 1e-5;

 private:
  Linear attention_hidden_, attention_score_;
  LayerNorm norm_;
  Linear embed_, classify_;
};

// Learnable band-pass front end: each channel is a Hamming-windowed
// difference of sinc low-pass filters with cutoffs
//   f1 = min(min_low + |low|, nyquist - min_band)
//   f2 = min(f1 + min_band + |band|, nyquist).
class SincConv {
 public:
  SincConv() = default;
  SincConv(ParamStore& store, const std::string& name, const SincConfig& cfg);

  // [C x 1 x K] filters built from the current cutoffs.
  ad::Tensor filters() const;
  // Raw band-passed signal [1 x C x T] for a [N] signal.
  ad::Tensor filtered(const ad::Tensor& signal) const;
  // log(|filtered| + kLogOffset).
  ad::Tensor operator()(const ad::Tensor& signal) const;
  std::size_t output_length(std::size_t samples) const;
  // Effective (f1, f2) in Hz for channel c.
  std::pair<double, double> band(std::size_t c) const;
  const SincConfig& config() const { return cfg_; }

  static constexpr double kLogOffset = 1e-3;

 private:
  SincConfig cfg_;
  ad::Tensor low_, band_;
};

// Five dilated frame-level layers (kernels 5,3,3,1,1; dilations 1,2,3,1,1),
// statistics pooling and a linear embedding layer.
class XVectorStack {
 public:
  XVectorStack() = default;
  XVectorStack(ParamStore& store, const std::string& name, std::size_t in,
               const XVectorConfig& cfg);
  // [1 x C x T] -> [embedding_dim]
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx) const;
  // Mean then std over time of [1 x C x T] -> [1 x 2C].
  static ad::Tensor statistics_pooling(const ad::Tensor& x);
  static std::size_t receptive_field();

 private:
  std::vector<Conv1d> convs_;
  std::vector<BatchNorm1d> norms_;
  Linear embed_;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name,
                     std::size_t d_model, std::size_t heads);
  // x: [T x d]; mask: optional row-major [T x T], nonzero = allowed.
  ad::Tensor operator()(const ad::Tensor& x,
                        std::span<const std::uint8_t> mask = {}) const;

 private:
  std::size_t heads_ = 1;
  Linear q_, k_, v_, o_;
};

// Macaron block: half FFN, self-attention, convolution module, half FFN,
// final layer norm. [T x d] -> [T x d].
class ConformerBlock {
 public:
  ConformerBlock() = default;
  ConformerBlock(ParamStore& store, const std::string& name,
                 const ConformerConfig& cfg);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx,
                        std::span<const std::uint8_t> mask = {}) const;

 private:
  struct FeedForward {
    LayerNorm norm;
    Linear up, down;
  };
  ad::Tensor feed_forward(const FeedForward& f, const ad::Tensor& x,
                          const ForwardContext& ctx) const;

  FeedForward ffn1_, ffn2_;
  LayerNorm attention_norm_;
  MultiHeadAttention attention_;
  LayerNorm conv_norm_;
  Conv1d pointwise_in_, depthwise_, pointwise_out_;
  BatchNorm1d conv_bn_;
  LayerNorm final_norm_;
};

// Feed-forward Transformer block: post-norm self-attention and a two-layer
// convolutional feed-forward network.
class FftBlock {
 public:
  FftBlock() = default;
  FftBlock(ParamStore& store, const std::string& name, const FftConfig& cfg);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx) const;

 private:
  MultiHeadAttention attention_;
  LayerNorm norm1_, norm2_;
  Conv1d conv1_, conv2_;
};

class FftStack {
 public:
  FftStack() = default;
  FftStack(ParamStore& store, const std::string& name, const FftConfig& cfg,
           std::size_t stacks);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx) const;
  std::size_t size() const { return blocks_.size(); }

 private:
  std::vector<FftBlock> blocks_;
};

// Two stride-2 convolutions with relu: [T x in] -> [ceil(T/4) x out].
class Subsample4 {
 public:
  Subsample4() = default;
  Subsample4(ParamStore& store, const std::string& name, std::size_t in,
             std::size_t out);
  ad::Tensor operator()(const ad::Tensor& x) const;
  static std::size_t output_length(std::size_t t) { return (t + 3) / 4; }

 private:
  Conv1d conv1_, conv2_;
};

// Two stride-2 transposed convolutions (kernel 4, padding 1) with relu:
// [T x in] -> [4T x out].
class Upsample4 {
 public:
  Upsample4() = default;
  Upsample4(ParamStore& store, const std::string& name, std::size_t in,
            std::size_t out);
  ad::Tensor operator()(const ad::Tensor& x) const;

 private:
  ConvTranspose1d up1_, up2_;
};

// x + Linear(l2_normalize(e)) broadcast over frames.
class Condition {
 public:
  Condition() = default;
  Condition(ParamStore& store, const std::string& name, std::size_t embedding,
            std::size_t d_model);
  ad::Tensor offset(const ad::Tensor& e) const;  // [d_model]
  ad::Tensor operator()(const ad::Tensor& x, const ad::Tensor& e) const;

 private:
  std::size_t embedding_ = 0;
  Linear projection_;
};

}  // namespace acvc::nn
