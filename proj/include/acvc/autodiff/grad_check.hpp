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
#include <functional>
#include <span>

#include "acvc/autodiff/tensor.hpp"

namespace acvc::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_leaf = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients of a scalar function against central
// differences. Error per element is |analytic - numeric| / max(1, |numeric|).
//
// relu and abs use subgradient 0 at exactly 0; inputs sitting on such kinks
// disagree with central differences and must be kept off them by the caller.
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double eps = 1e-5);

// Checks several leaves at once; `f` reads them from its closure. When
// max_entries_per_leaf is nonzero, large leaves are probed at evenly spaced
// positions only.
GradCheckResult grad_check(const std::function<Tensor()>& f,
                           std::span<Tensor> leaves, double eps = 1e-5,
                           std::size_t max_entries_per_leaf = 0);

}  // namespace acvc::ad
