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

// No alignment of the targets fits in the available steps.
class InfeasibleAlignment : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// log_probs is row-major [steps x classes] with the blank as the last class.
struct CtcResult {
  double loss = 0.0;  // +inf when infeasible
  bool feasible = true;
  std::vector<double> grad;  // dloss/dlog_probs; zeros when infeasible
};

// Forward-backward over the blank-interleaved target lattice, in log space.
CtcResult ctc_forward_backward(std::span<const double> log_probs,
                               std::size_t steps, std::size_t classes,
                               std::span<const std::size_t> targets);

// Sums the probability of every length-T label sequence that collapses to
// the targets. Requires classes^steps <= 1e6.
double ctc_brute_force(std::span<const double> log_probs, std::size_t steps,
                       std::size_t classes,
                       std::span<const std::size_t> targets);

// Minimum steps an alignment of `targets` needs (one blank between repeats).
std::size_t ctc_min_steps(std::span<const std::size_t> targets);

// Differentiable CTC over a [T x (V + 1)] log-probability tensor. Throws
// InfeasibleAlignment when no path exists.
ad::Tensor ctc_loss(const ad::Tensor& log_probs,
                    std::span<const std::size_t> targets);

}  // namespace acvc::losses
