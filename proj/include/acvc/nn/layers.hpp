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
#include <string>

#include "acvc/autodiff/ops.hpp"
#include "acvc/nn/params.hpp"

namespace acvc::nn {

// Layout helpers for single-utterance tensors.
// [T x C] <-> [1 x C x T]
ad::Tensor to_channels(const ad::Tensor& frames);
ad::Tensor to_frames(const ad::Tensor& channels);

ad::Tensor dropout(const ad::Tensor& x, const ForwardContext& ctx);

// Gated linear unit over the channel axis of [1 x 2C x T].
ad::Tensor glu(const ad::Tensor& x);

// Sinusoidal absolute positions, [length x dim].
ad::Tensor positional_encoding(std::size_t length, std::size_t dim);

// y = x W + b with W stored [in x out].
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in,
         std::size_t out, bool bias = true);
  ad::Tensor operator()(const ad::Tensor& x) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  const ad::Tensor& weight() const { return weight_; }
  const ad::Tensor& bias() const { return bias_; }

 private:
  std::size_t in_ = 0, out_ = 0;
  ad::Tensor weight_, bias_;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParamStore& store, const std::string& name, std::size_t in,
         std::size_t out, std::size_t kernel, ad::Conv1dOptions opts = {},
         bool bias = true);
  ad::Tensor operator()(const ad::Tensor& x) const;
  const ad::Conv1dOptions& options() const { return opts_; }

 private:
  ad::Tensor weight_, bias_;
  ad::Conv1dOptions opts_;
};

class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(ParamStore& store, const std::string& name, std::size_t in,
                  std::size_t out, std::size_t kernel, std::size_t stride,
                  std::size_t padding);
  ad::Tensor operator()(const ad::Tensor& x) const;

 private:
  ad::Tensor weight_, bias_;
  std::size_t stride_ = 1, padding_ = 0;
};

// Batch normalization over [B x C x T]; statistics over batch and time.
class BatchNorm1d {
 public:
  BatchNorm1d() = default;
  BatchNorm1d(ParamStore& store, const std::string& name, std::size_t channels);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardContext& ctx) const;

  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

 private:
  std::size_t channels_ = 0;
  ad::Tensor gamma_, beta_, running_mean_, running_var_;
};

// Layer norm over the last axis with affine parameters.
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::size_t dim);
  ad::Tensor operator()(const ad::Tensor& x) const;

 private:
  ad::Tensor gamma_, beta_;
};

}  // namespace acvc::nn
