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

// Differentiable tensor ops. Every op records onto the graph when any input
// requires grad and recording is enabled.
//
// Broadcasting follows trailing-axis rules only: in a binary op the smaller
// operand's shape must equal the trailing dimensions of the larger one (or the
// smaller operand holds a single element).
//
// Axes are ints; negative values count from the end.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acvc/autodiff/tensor.hpp"

namespace acvc::ad {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
// Gradient passes only where x > lo.
Tensor clamp_min(const Tensor& x, double lo);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator*(const Tensor& x, double c) { return scale(x, c); }
inline Tensor operator*(double c, const Tensor& x) { return scale(x, c); }

Tensor sum(const Tensor& x, int axis, bool keepdim = false);
Tensor mean(const Tensor& x, int axis, bool keepdim = false);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x, int axis0, int axis1);
Tensor concat(std::span<const Tensor> parts, int axis);
Tensor slice(const Tensor& x, int axis, std::size_t start, std::size_t length);
// Scalar (shape [1]) holding x.data()[flat_index].
Tensor take(const Tensor& x, std::size_t flat_index);

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t dilation = 1;
  std::size_t groups = 1;
};

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 const Conv1dOptions& opts);
std::size_t conv_transpose1d_output_length(std::size_t length,
                                           std::size_t kernel,
                                           std::size_t stride,
                                           std::size_t padding);

// x: [batch x in_channels x time], weight: [out x in/groups x kernel],
// bias: [out] or undefined.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv1dOptions& opts = {});

// x: [batch x in x time], weight: [in x out x kernel], bias: [out] or
// undefined. Output time = (T - 1) * stride - 2 * padding + kernel.
Tensor conv_transpose1d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, std::size_t stride,
                        std::size_t padding);

Tensor softmax(const Tensor& x, int axis);
Tensor log_softmax(const Tensor& x, int axis);
// Normalizes to zero mean and unit (biased) variance along axis.
Tensor layer_norm(const Tensor& x, int axis, double eps = 1e-5);

// q: [T x d], k: [S x d], v: [S x dv]. mask, when non-empty, is a row-major
// [T x S] array where nonzero marks an allowed query/key pair.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::span<const std::uint8_t> mask = {});

// table: [V x d] -> [ids.size() x d]
Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> ids);

// Unit L2 norm along axis. Lanes with norm below eps map to zero (with zero
// gradient).
Tensor l2_normalize(const Tensor& x, int axis, double eps = 1e-12);

}  // namespace acvc::ad
