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
#include <string>
#include <vector>

#include "acvc/autodiff/tensor.hpp"

namespace acvc::ad {

enum class OptimizerKind { kSgd, kAdamW };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double lr = 1e-3;
  double weight_decay = 0.0;
  // SGD
  double momentum = 0.0;
  // AdamW
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Cosine annealing; schedule_steps == 0 keeps lr constant.
  double lr_min = 0.0;
  long schedule_steps = 0;
};

std::string to_string(OptimizerKind kind);

// lr(t) = lr_min + 0.5 * (lr0 - lr_min) * (1 + cos(pi * t / t_max)), t clamped
// to [0, t_max].
double cosine_lr(double lr0, double lr_min, long t, long t_max);

struct OptimizerState {
  std::vector<std::vector<double>> first;   // momentum buffer / Adam m
  std::vector<std::vector<double>> second;  // Adam v
  long steps = 0;
};

// One update of `params` in place using their accumulated gradients.
// Parameters without a gradient are left untouched. SGD uses coupled L2
// weight decay (g += wd * p); AdamW decouples it (p *= 1 - lr * wd).
void optimizer_step(std::span<Tensor> params, OptimizerState& state,
                    const OptimizerConfig& config, double lr);

class Optimizer {
 public:
  Optimizer(std::vector<Tensor> params, OptimizerConfig config);

  // Applies one update at the scheduled rate and advances the schedule.
  void step();
  void zero_grad();
  double current_lr() const;
  long steps_taken() const { return state_.steps; }
  const OptimizerConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  OptimizerConfig config_;
  OptimizerState state_;
};

}  // namespace acvc::ad
