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


#include "acvc/nn/layers.hpp"

#include <cmath>
#include <random>

namespace acvc::nn {

using ad::Tensor;

Tensor to_channels(const Tensor& frames) {
  if (frames.rank() != 2) {
    throw ad::ShapeError("to_channels expects [T x C], got " +
                         ad::shape_string(frames.shape()));
  }
  return ad::reshape(ad::transpose(frames, 0, 1),
                     {1, frames.dim(1), frames.dim(0)});
}

Tensor to_frames(const Tensor& channels) {
  if (channels.rank() != 3 || channels.dim(0) != 1) {
    throw ad::ShapeError("to_frames expects [1 x C x T], got " +
                         ad::shape_string(channels.shape()));
  }
  return ad::transpose(
      ad::reshape(channels, {channels.dim(1), channels.dim(2)}), 0, 1);
}

Tensor dropout(const Tensor& x, const ForwardContext& ctx) {
  if (!ctx.training || ctx.dropout <= 0.0) return x;
  if (ctx.rng == nullptr) throw ParamError("training-mode dropout needs an rng");
  std::bernoulli_distribution keep(1.0 - ctx.dropout);
  const double scale = 1.0 / (1.0 - ctx.dropout);
  std::vector<double> mask(x.numel());
  for (auto& m : mask) m = keep(*ctx.rng) ? scale : 0.0;
  return ad::mul(x, Tensor::from_vector(x.shape(), std::move(mask)));
}

Tensor glu(const Tensor& x) {
  const std::size_t c = x.dim(1) / 2;
  return ad::mul(ad::slice(x, 1, 0, c), ad::sigmoid(ad::slice(x, 1, c, c)));
}

Tensor positional_encoding(std::size_t length, std::size_t dim) {
  std::vector<double> pe(length * dim);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      const double a = static_cast<double>(t) * rate;
      pe[t * dim + i] = i % 2 == 0 ? std::sin(a) : std::cos(a);
    }
  }
  return Tensor::from_vector({length, dim}, std::move(pe));
}

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in,
               std::size_t out, bool bias)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = store.parameter(name + ".weight", {in, out}, bound);
  if (bias) bias_ = store.parameter(name + ".bias", {out}, bound);
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = ad::matmul(x, weight_);
  return bias_.defined() ? ad::add(y, bias_) : y;
}

Conv1d::Conv1d(ParamStore& store, const std::string& name, std::size_t in,
               std::size_t out, std::size_t kernel, ad::Conv1dOptions opts,
               bool bias)
    : opts_(opts) {
  const std::size_t fan_in = in / opts.groups * kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  weight_ = store.parameter(name + ".weight", {out, in / opts.groups, kernel},
                            bound);
  if (bias) bias_ = store.parameter(name + ".bias", {out}, bound);
}

Tensor Conv1d::operator()(const Tensor& x) const {
  return ad::conv1d(x, weight_, bias_, opts_);
}

ConvTranspose1d::ConvTranspose1d(ParamStore& store, const std::string& name,
                                 std::size_t in, std::size_t out,
                                 std::size_t kernel, std::size_t stride,
                                 std::size_t padding)
    : stride_(stride), padding_(padding) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(out * kernel));
  weight_ = store.parameter(name + ".weight", {in, out, kernel}, bound);
  bias_ = store.parameter(name + ".bias", {out}, bound);
}

Tensor ConvTranspose1d::operator()(const Tensor& x) const {
  return ad::conv_transpose1d(x, weight_, bias_, stride_, padding_);
}

BatchNorm1d::BatchNorm1d(ParamStore& store, const std::string& name,
                         std::size_t channels)
    : channels_(channels) {
  gamma_ = store.constant(name + ".gamma", {channels}, 1.0);
  beta_ = store.constant(name + ".beta", {channels}, 0.0);
  running_mean_ = store.buffer(name + ".running_mean", {channels}, 0.0);
  running_var_ = store.buffer(name + ".running_var", {channels}, 1.0);
}

Tensor BatchNorm1d::operator()(const Tensor& x, const ForwardContext& ctx) const {
  if (x.rank() != 3 || x.dim(1) != channels_) {
    throw ad::ShapeError("batch norm over " + std::to_string(channels_) +
                         " channels got " + ad::shape_string(x.shape()));
  }
  const std::size_t b = x.dim(0), c = x.dim(1), t = x.dim(2);
  // Channels last so per-channel vectors broadcast: [B*T x C].
  Tensor rows = ad::reshape(ad::transpose(x, 1, 2), {b * t, c});
  if (ctx.training) {
    Tensor mean = ad::mean(rows, 0);
    Tensor centered = ad::sub(rows, mean);
    Tensor var = ad::mean(ad::square(centered), 0);
    const double n = static_cast<double>(b * t);
    const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    Tensor rm = running_mean_, rv = running_var_;
    auto rmv = rm.mutable_data();
    auto rvv = rv.mutable_data();
    for (std::size_t i = 0; i < c; ++i) {
      rmv[i] = (1.0 - kMomentum) * rmv[i] + kMomentum * mean.data()[i];
      rvv[i] = (1.0 - kMomentum) * rvv[i] + kMomentum * var.data()[i] * unbias;
    }
    if (!ctx.running_statistics) {
      Tensor inv = ad::div(gamma_, ad::sqrt(ad::add_scalar(var, kEps)));
      return ad::transpose(
          ad::reshape(ad::add(ad::mul(centered, inv), beta_), {b, t, c}), 1, 2);
    }
  }
  Tensor inv = ad::div(gamma_, ad::sqrt(ad::add_scalar(running_var_, kEps)));
  Tensor shift = ad::sub(beta_, ad::mul(running_mean_, inv));
  Tensor y = ad::add(ad::mul(rows, inv), shift);
  return ad::transpose(ad::reshape(y, {b, t, c}), 1, 2);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name,
                     std::size_t dim) {
  gamma_ = store.constant(name + ".gamma", {dim}, 1.0);
  beta_ = store.constant(name + ".beta", {dim}, 0.0);
}

Tensor LayerNorm::operator()(const Tensor& x) const {
  return ad::add(ad::mul(ad::layer_norm(x, -1), gamma_), beta_);
}

}  // namespace acvc::nn
