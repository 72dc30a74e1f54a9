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
#include <span>
#include <stdexcept>
#include <vector>

#include "acvc/autodiff/tensor.hpp"

namespace acvc::losses {

class LossError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// -log softmax(logits)[target] for a [K] logit vector.
ad::Tensor cross_entropy(const ad::Tensor& logits, std::size_t target);

// Sum of the accent and gender cross-entropies.
ad::Tensor accent_gender_loss(const ad::Tensor& accent_logits,
                              std::size_t accent_id,
                              const ad::Tensor& gender_logits,
                              std::size_t gender_id);

struct AamConfig {
  double scale = 30.0;
  double margin = 0.2;
};

// Additive angular margin softmax over cosines between the normalized
// embedding [E] and normalized class weights [K x E]. The target logit uses
// cos(theta + m) while theta + m < pi and cos(theta) - m sin(m) beyond that,
// which keeps the loss non-decreasing in m.
ad::Tensor aam_loss(const ad::Tensor& embedding, const ad::Tensor& class_weights,
                    std::size_t target, const AamConfig& cfg = {});

// Masked mean squared error between frame-major mel matrices [N x B]:
//   sum_i d_i sum_b (y_ib - x_ib)^2 / (B * sum_i d_i).
ad::Tensor mel_loss(const ad::Tensor& predicted, const ad::Tensor& target,
                    std::span<const double> frame_mask);

}  // namespace acvc::losses
