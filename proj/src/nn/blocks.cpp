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


#include "acvc/nn/blocks.hpp"

#include <cmath>
#include <numbers>

namespace acvc::nn {

using ad::Tensor;

namespace {

Tensor concat2(const Tensor& a, const Tensor& b, int axis) {
  Tensor parts[] = {a, b};
  return ad::concat(parts, axis);
}

// Builds [C x 1 x K] band-pass filters from raw cutoff parameters, with
// analytic gradients. The derivative of (2f/fs) sinc(2fn/fs) with respect to
// f is (2/fs) cos(2 pi f n / fs) for every tap, including n = 0.
Tensor sinc_bank(const Tensor& low, const Tensor& band, const SincConfig& cfg) {
  const std::size_t c = cfg.channels, k = cfg.kernel;
  const double fs = cfg.sample_rate;
  const double nyq = fs / 2.0;
  const long half = static_cast<long>(k / 2);
  std::vector<double> window(k);
  for (std::size_t i = 0; i < k; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (k - 1));
  }
  std::vector<double> f1(c), f2(c);
  std::vector<bool> f1_clamped(c), f2_clamped(c);
  for (std::size_t i = 0; i < c; ++i) {
    double a = cfg.min_low_hz + std::fabs(low.data()[i]);
    f1_clamped[i] = a > nyq - cfg.min_band_hz;
    f1[i] = f1_clamped[i] ? nyq - cfg.min_band_hz : a;
    double b = f1[i] + cfg.min_band_hz + std::fabs(band.data()[i]);
    f2_clamped[i] = b > nyq;
    f2[i] = f2_clamped[i] ? nyq : b;
  }
  auto lowpass = [fs](double f, long n) {
    if (n == 0) return 2.0 * f / fs;
    return std::sin(2.0 * std::numbers::pi * f * n / fs) /
           (std::numbers::pi * static_cast<double>(n));
  };
  std::vector<double> out(c * k);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      long n = static_cast<long>(j) - half;
      out[i * k + j] = window[j] * (lowpass(f2[i], n) - lowpass(f1[i], n));
    }
  }
  return ad::detail::make_result(
      "sinc_bank", {c, 1, k}, std::move(out), {low, band},
      [=](ad::detail::Node& self) {
        auto& low_node = *self.inputs[0];
        auto& band_node = *self.inputs[1];
        auto* gl = low_node.requires_grad ? &low_node.ensure_grad() : nullptr;
        auto* gb = band_node.requires_grad ? &band_node.ensure_grad() : nullptr;
        for (std::size_t i = 0; i < c; ++i) {
          double d1 = 0.0, d2 = 0.0;  // dL/df1, dL/df2
          for (std::size_t j = 0; j < k; ++j) {
            long n = static_cast<long>(j) - half;
            double g = self.grad[i * k + j] * window[j] * 2.0 / fs;
            d2 += g * std::cos(2.0 * std::numbers::pi * f2[i] * n / fs);
            d1 -= g * std::cos(2.0 * std::numbers::pi * f1[i] * n / fs);
          }
          if (f2_clamped[i]) d2 = 0.0;
          // f2 depends on f1 unless clamped.
          double df1_total = d1 + d2;
          double sl = low_node.value[i] >= 0.0 ? 1.0 : -1.0;
          double sb = band_node.value[i] >= 0.0 ? 1.0 : -1.0;
          if (gl && !f1_clamped[i]) (*gl)[i] += df1_total * sl;
          if (gb) (*gb)[i] += d2 * sb;
        }
      });
}

}  // namespace

// --- JasperStack ----------------------------------------------------------

JasperStack::JasperStack(ParamStore& store, const std::string& name,
                         std::size_t in, const JasperConfig& cfg) {
  if (cfg.widths.size() != cfg.kernels.size() || cfg.widths.empty() ||
      cfg.sub_blocks == 0) {
    throw ParamError("jasper config needs matching non-empty widths/kernels");
  }
  std::size_t ch = in;
  for (std::size_t b = 0; b < cfg.widths.size(); ++b) {
    const std::string p = name + ".block" + std::to_string(b);
    const std::size_t w = cfg.widths[b], k = cfg.kernels[b];
    Block block;
    std::size_t sub_in = ch;
    for (std::size_t s = 0; s < cfg.sub_blocks; ++s) {
      const std::string sp = p + ".sub" + std::to_string(s);
      block.convs.emplace_back(store, sp + ".conv", sub_in, w, k,
                               ad::Conv1dOptions{.padding = k / 2}, false);
      block.norms.emplace_back(store, sp + ".bn", w);
      sub_in = w;
    }
    block.residual = Conv1d(store, p + ".residual.conv", ch, w, 1, {}, false);
    block.residual_norm = BatchNorm1d(store, p + ".residual.bn", w);
    blocks_.push_back(std::move(block));
    ch = w;
  }
  out_ = ch;
}

Tensor JasperStack::operator()(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = x;
  for (const Block& block : blocks_) {
    Tensor in = h;
    for (std::size_t s = 0; s < block.convs.size(); ++s) {
      h = block.norms[s](block.convs[s](h), ctx);
      if (s + 1 == block.convs.size()) {
        h = ad::add(h, block.residual_norm(block.residual(in), ctx));
      }
      h = dropout(ad::relu(h), ctx);
    }
  }
  return h;
}

// --- AttentivePoolingDecoder ----------------------------------------------

AttentivePoolingDecoder::AttentivePoolingDecoder(
    ParamStore& store, const std::string& name, std::size_t channels,
    const PoolingDecoderConfig& cfg, std::size_t classes)
    : attention_hidden_(store, name + ".attention.hidden", channels,
                        cfg.attention_dim),
      attention_score_(store, name + ".attention.score", cfg.attention_dim, 1),
      norm_(store, name + ".norm", 2 * channels),
      embed_(store, name + ".embed", 2 * channels, cfg.embedding_dim),
      classify_(store, name + ".classify", cfg.embedding_dim, classes) {}

AttentivePoolingDecoder::Output AttentivePoolingDecoder::operator()(
    const Tensor& frames) const {
  if (frames.rank() != 2 || frames.dim(0) == 0) {
    throw ad::ShapeError("attention pooling needs [T x C] with T >= 1, got " +
                         ad::shape_string(frames.shape()));
  }
  const std::size_t t = frames.dim(0), c = frames.dim(1);
  Output out;
  Tensor scores = attention_score_(ad::tanh(attention_hidden_(frames)));
  out.weights = ad::softmax(ad::reshape(scores, {t}), 0);
  Tensor row = ad::reshape(out.weights, {1, t});
  Tensor mean = ad::matmul(row, frames);
  Tensor centered = ad::sub(frames, ad::reshape(mean, {c}));
  Tensor var = ad::matmul(row, ad::square(centered));
  Tensor std = ad::add_scalar(ad::sqrt(ad::add_scalar(var, kStdEps)),
                              -std::sqrt(kStdEps));
  out.pooled = concat2(mean, std, 1);
  Tensor emb = embed_(norm_(out.pooled));
  out.logits = ad::reshape(classify_(emb), {classify_.out()});
  out.embedding = ad::reshape(emb, {embed_.out()});
  return out;
}

// --- SincConv --------------------------------------------------------------

SincConv::SincConv(ParamStore& store, const std::string& name,
                   const SincConfig& cfg)
    : cfg_(cfg) {
  if (cfg.kernel % 2 == 0) throw ParamError("sinc kernel must be odd");
  const double nyq = cfg.sample_rate / 2.0;
  const double lo = 30.0;
  const double hi = nyq - (cfg.min_low_hz + cfg.min_band_hz);
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> edges(cfg.channels + 1);
  for (std::size_t i = 0; i <= cfg.channels; ++i) {
    edges[i] = hz(mel(lo) + (mel(hi) - mel(lo)) * i / cfg.channels);
  }
  low_ = store.constant(name + ".low_hz", {cfg.channels}, 0.0);
  band_ = store.constant(name + ".band_hz", {cfg.channels}, 0.0);
  auto lv = low_.mutable_data();
  auto bv = band_.mutable_data();
  for (std::size_t i = 0; i < cfg.channels; ++i) {
    lv[i] = store.round(edges[i]);
    bv[i] = store.round(edges[i + 1] - edges[i]);
  }
}

Tensor SincConv::filters() const { return sinc_bank(low_, band_, cfg_); }

std::size_t SincConv::output_length(std::size_t samples) const {
  return ad::conv1d_output_length(samples, cfg_.kernel,
                                  {.stride = cfg_.stride});
}

Tensor SincConv::filtered(const Tensor& signal) const {
  if (signal.rank() != 1) {
    throw ad::ShapeError("sinc conv expects a [N] signal, got " +
                         ad::shape_string(signal.shape()));
  }
  if (output_length(signal.numel()) == 0) {
    throw ad::ShapeError("signal of " + std::to_string(signal.numel()) +
                         " samples is shorter than the sinc kernel");
  }
  return ad::conv1d(ad::reshape(signal, {1, 1, signal.numel()}), filters(),
                    Tensor{}, {.stride = cfg_.stride});
}

Tensor SincConv::operator()(const Tensor& signal) const {
  return ad::log(ad::add_scalar(ad::abs(filtered(signal)), kLogOffset));
}

std::pair<double, double> SincConv::band(std::size_t c) const {
  const double nyq = cfg_.sample_rate / 2.0;
  double f1 = std::min(cfg_.min_low_hz + std::fabs(low_.data()[c]),
                       nyq - cfg_.min_band_hz);
  double f2 = std::min(f1 + cfg_.min_band_hz + std::fabs(band_.data()[c]), nyq);
  return {f1, f2};
}

// --- XVectorStack -----------------------------------------------------------

namespace {
constexpr std::size_t kXvKernels[] = {5, 3, 3, 1, 1};
constexpr std::size_t kXvDilations[] = {1, 2, 3, 1, 1};
}  // namespace

XVectorStack::XVectorStack(ParamStore& store, const std::string& name,
                           std::size_t in, const XVectorConfig& cfg) {
  if (cfg.widths.size() != 5) throw ParamError("x-vector needs five widths");
  std::size_t ch = in;
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string p = name + ".frame" + std::to_string(i);
    convs_.emplace_back(store, p + ".conv", ch, cfg.widths[i], kXvKernels[i],
                        ad::Conv1dOptions{.dilation = kXvDilations[i]});
    norms_.emplace_back(store, p + ".bn", cfg.widths[i]);
    ch = cfg.widths[i];
  }
  embed_ = Linear(store, name + ".embed", 2 * ch, cfg.embedding_dim);
}

std::size_t XVectorStack::receptive_field() {
  std::size_t r = 1;
  for (std::size_t i = 0; i < 5; ++i) r += (kXvKernels[i] - 1) * kXvDilations[i];
  return r;
}

Tensor XVectorStack::statistics_pooling(const Tensor& x) {
  Tensor f = to_frames(x);
  const std::size_t c = f.dim(1);
  Tensor mean = ad::mean(f, 0);
  Tensor var = ad::mean(ad::square(ad::sub(f, mean)), 0);
  Tensor std = ad::add_scalar(
      ad::sqrt(ad::add_scalar(var, AttentivePoolingDecoder::kStdEps)),
      -std::sqrt(AttentivePoolingDecoder::kStdEps));
  return concat2(ad::reshape(mean, {1, c}), ad::reshape(std, {1, c}), 1);
}

Tensor XVectorStack::operator()(const Tensor& x, const ForwardContext& ctx) const {
  if (x.rank() != 3 || x.dim(2) < receptive_field()) {
    throw ad::ShapeError("x-vector stack needs at least " +
                         std::to_string(receptive_field()) +
                         " frames, got " + ad::shape_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = norms_[i](ad::relu(convs_[i](h)), ctx);
  }
  return ad::reshape(embed_(statistics_pooling(h)), {embed_.out()});
}

// --- MultiHeadAttention ---------------------------------------------------

MultiHeadAttention::MultiHeadAttention(ParamStore& store,
                                       const std::string& name,
                                       std::size_t d_model, std::size_t heads)
    : heads_(heads),
      q_(store, name + ".q", d_model, d_model),
      k_(store, name + ".k", d_model, d_model),
      v_(store, name + ".v", d_model, d_model),
      o_(store, name + ".o", d_model, d_model) {
  if (heads == 0 || d_model % heads != 0) {
    throw ParamError("d_model " + std::to_string(d_model) +
                     " not divisible by heads " + std::to_string(heads));
  }
}

Tensor MultiHeadAttention::operator()(const Tensor& x,
                                      std::span<const std::uint8_t> mask) const {
  Tensor q = q_(x), k = k_(x), v = v_(x);
  if (heads_ == 1) return o_(ad::scaled_dot_attention(q, k, v, mask));
  const std::size_t dh = x.dim(1) / heads_;
  std::vector<Tensor> parts;
  parts.reserve(heads_);
  for (std::size_t h = 0; h < heads_; ++h) {
    parts.push_back(ad::scaled_dot_attention(ad::slice(q, 1, h * dh, dh),
                                             ad::slice(k, 1, h * dh, dh),
                                             ad::slice(v, 1, h * dh, dh), mask));
  }
  return o_(ad::concat(parts, 1));
}

// --- ConformerBlock ---------------------------------------------------------

ConformerBlock::ConformerBlock(ParamStore& store, const std::string& name,
                               const ConformerConfig& cfg) {
  const std::size_t d = cfg.d_model;
  auto ffn = [&](const std::string& p) {
    return FeedForward{LayerNorm(store, p + ".norm", d),
                       Linear(store, p + ".up", d, cfg.ffn_dim),
                       Linear(store, p + ".down", cfg.ffn_dim, d)};
  };
  ffn1_ = ffn(name + ".ffn1");
  attention_norm_ = LayerNorm(store, name + ".attention_norm", d);
  attention_ = MultiHeadAttention(store, name + ".attention", d, cfg.heads);
  conv_norm_ = LayerNorm(store, name + ".conv_norm", d);
  pointwise_in_ = Conv1d(store, name + ".conv.pointwise_in", d, 2 * d, 1);
  depthwise_ = Conv1d(store, name + ".conv.depthwise", d, d, cfg.conv_kernel,
                      {.padding = cfg.conv_kernel / 2, .groups = d});
  conv_bn_ = BatchNorm1d(store, name + ".conv.bn", d);
  pointwise_out_ = Conv1d(store, name + ".conv.pointwise_out", d, d, 1);
  ffn2_ = ffn(name + ".ffn2");
  final_norm_ = LayerNorm(store, name + ".final_norm", d);
}

Tensor ConformerBlock::feed_forward(const FeedForward& f, const Tensor& x,
                                    const ForwardContext& ctx) const {
  Tensor h = dropout(ad::silu(f.up(f.norm(x))), ctx);
  return dropout(f.down(h), ctx);
}

Tensor ConformerBlock::operator()(const Tensor& x, const ForwardContext& ctx,
                                  std::span<const std::uint8_t> mask) const {
  Tensor h = ad::add(x, ad::scale(feed_forward(ffn1_, x, ctx), 0.5));
  h = ad::add(h, dropout(attention_(attention_norm_(h), mask), ctx));
  Tensor c = to_channels(conv_norm_(h));
  c = glu(pointwise_in_(c));
  c = ad::silu(conv_bn_(depthwise_(c), ctx));
  c = dropout(pointwise_out_(c), ctx);
  h = ad::add(h, to_frames(c));
  h = ad::add(h, ad::scale(feed_forward(ffn2_, h, ctx), 0.5));
  return final_norm_(h);
}

// --- FFT blocks -------------------------------------------------------------

FftBlock::FftBlock(ParamStore& store, const std::string& name,
                   const FftConfig& cfg)
    : attention_(store, name + ".attention", cfg.d_model, cfg.heads),
      norm1_(store, name + ".norm1", cfg.d_model),
      norm2_(store, name + ".norm2", cfg.d_model),
      conv1_(store, name + ".conv1", cfg.d_model, cfg.d_inner, cfg.kernel,
             {.padding = cfg.kernel / 2}),
      conv2_(store, name + ".conv2", cfg.d_inner, cfg.d_model, cfg.kernel,
             {.padding = cfg.kernel / 2}) {}

Tensor FftBlock::operator()(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = norm1_(ad::add(x, dropout(attention_(x), ctx)));
  Tensor c = conv2_(ad::relu(conv1_(to_channels(h))));
  return norm2_(ad::add(h, dropout(to_frames(c), ctx)));
}

FftStack::FftStack(ParamStore& store, const std::string& name,
                   const FftConfig& cfg, std::size_t stacks) {
  for (std::size_t i = 0; i < stacks; ++i) {
    blocks_.emplace_back(store, name + "." + std::to_string(i), cfg);
  }
}

Tensor FftStack::operator()(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = x;
  for (const auto& b : blocks_) h = b(h, ctx);
  return h;
}

// --- Resampling blocks --------------------------------------------------------

Subsample4::Subsample4(ParamStore& store, const std::string& name,
                       std::size_t in, std::size_t out)
    : conv1_(store, name + ".conv1", in, out, 3, {.stride = 2, .padding = 1}),
      conv2_(store, name + ".conv2", out, out, 3, {.stride = 2, .padding = 1}) {}

Tensor Subsample4::operator()(const Tensor& x) const {
  Tensor c = ad::relu(conv1_(to_channels(x)));
  return to_frames(ad::relu(conv2_(c)));
}

Upsample4::Upsample4(ParamStore& store, const std::string& name, std::size_t in,
                     std::size_t out)
    : up1_(store, name + ".up1", in, out, 4, 2, 1),
      up2_(store, name + ".up2", out, out, 4, 2, 1) {}

Tensor Upsample4::operator()(const Tensor& x) const {
  Tensor c = ad::relu(up1_(to_channels(x)));
  return to_frames(ad::relu(up2_(c)));
}

// --- Condition ------------------------------------------------------------------

Condition::Condition(ParamStore& store, const std::string& name,
                     std::size_t embedding, std::size_t d_model)
    : embedding_(embedding),
      projection_(store, name + ".projection", embedding, d_model) {}

Tensor Condition::offset(const Tensor& e) const {
  if (e.numel() != embedding_) {
    throw ad::ShapeError("condition expects a " + std::to_string(embedding_) +
                         "-d embedding, got " + ad::shape_string(e.shape()));
  }
  Tensor unit = ad::l2_normalize(ad::reshape(e, {1, embedding_}), -1);
  return ad::reshape(projection_(unit), {projection_.out()});
}

Tensor Condition::operator()(const Tensor& x, const Tensor& e) const {
  return ad::add(x, offset(e));
}

}  // namespace acvc::nn
