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


#include <cmath>
#include <string>

#include "acvc/autodiff/ops.hpp"
#include "acvc/losses/losses.hpp"

namespace acvc::losses {

using ad::Tensor;

Tensor cross_entropy(const Tensor& logits, std::size_t target) {
  if (logits.rank() != 1 || logits.numel() == 0) {
    throw LossError("cross_entropy expects a non-empty [K] logit vector, got " +
                    ad::shape_string(logits.shape()));
  }
  if (target >= logits.numel()) {
    throw LossError("target " + std::to_string(target) + " outside " +
                    std::to_string(logits.numel()) + " classes");
  }
  return ad::neg(ad::take(ad::log_softmax(logits, 0), target));
}

Tensor accent_gender_loss(const Tensor& accent_logits, std::size_t accent_id,
                          const Tensor& gender_logits, std::size_t gender_id) {
  return ad::add(cross_entropy(accent_logits, accent_id),
                 cross_entropy(gender_logits, gender_id));
}

Tensor aam_loss(const Tensor& embedding, const Tensor& class_weights,
                std::size_t target, const AamConfig& cfg) {
  if (embedding.rank() != 1 || class_weights.rank() != 2 ||
      class_weights.dim(1) != embedding.numel()) {
    throw LossError("aam_loss expects embedding [E] and weights [K x E], got " +
                    ad::shape_string(embedding.shape()) + " and " +
                    ad::shape_string(class_weights.shape()));
  }
  const std::size_t k = class_weights.dim(0);
  if (target >= k) throw LossError("aam target outside the class range");
  if (!(cfg.scale > 0.0) || cfg.margin < 0.0 ||
      cfg.margin >= std::acos(-1.0) / 2.0) {
    throw LossError("aam needs scale > 0 and margin in [0, pi/2)");
  }
  Tensor e = ad::l2_normalize(embedding, 0);
  Tensor w = ad::l2_normalize(class_weights, 1);
  Tensor cosines = ad::reshape(
      ad::matmul(w, ad::reshape(e, {embedding.numel(), 1})), {k});
  Tensor c = ad::take(cosines, target);
  const double m = cfg.margin;
  Tensor phi;
  if (c.item() > std::cos(std::acos(-1.0) - m)) {
    // sin(theta) from cos(theta); the floor keeps the derivative finite at
    // |cos| = 1.
    Tensor sin_t = ad::sqrt(ad::clamp_min(
        ad::add_scalar(ad::neg(ad::square(c)), 1.0), 1e-12));
    phi = ad::sub(ad::scale(c, std::cos(m)), ad::scale(sin_t, std::sin(m)));
  } else {
    phi = ad::add_scalar(c, -m * std::sin(m));
  }
  std::vector<double> onehot(k, 0.0);
  onehot[target] = 1.0;
  Tensor mask = Tensor::from_vector({k}, std::move(onehot));
  Tensor adjusted = ad::add(cosines, ad::mul(mask, ad::sub(phi, c)));
  return cross_entropy(ad::scale(adjusted, cfg.scale), target);
}

Tensor mel_loss(const Tensor& predicted, const Tensor& target,
                std::span<const double> frame_mask) {
  if (predicted.rank() != 2 || predicted.shape() != target.shape()) {
    throw LossError("mel_loss expects matching [N x B] inputs, got " +
                    ad::shape_string(predicted.shape()) + " and " +
                    ad::shape_string(target.shape()));
  }
  const std::size_t n = predicted.dim(0), b = predicted.dim(1);
  if (frame_mask.size() != n) {
    throw LossError("mel_loss mask has " + std::to_string(frame_mask.size()) +
                    " entries for " + std::to_string(n) + " frames");
  }
  double active = 0.0;
  std::vector<double> weights(n * b);
  for (std::size_t i = 0; i < n; ++i) {
    if (frame_mask[i] != 0.0 && frame_mask[i] != 1.0) {
      throw LossError("mel_loss mask entries must be 0 or 1");
    }
    active += frame_mask[i];
    for (std::size_t j = 0; j < b; ++j) weights[i * b + j] = frame_mask[i];
  }
  if (active == 0.0) throw LossError("mel_loss mask selects no frames");
  Tensor w = Tensor::from_vector({n, b}, std::move(weights));
  Tensor sq = ad::square(ad::sub(target, predicted));
  return ad::scale(ad::sum_all(ad::mul(sq, w)),
                   1.0 / (static_cast<double>(b) * active));
}

}  // namespace acvc::losses
