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

#include "acvc/autodiff/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acvc::ad {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adamw";
}

double cosine_lr(double lr0, double lr_min, long t, long t_max) {
  if (t_max <= 0) return lr0;
  double frac = static_cast<double>(std::clamp(t, 0L, t_max)) /
                static_cast<double>(t_max);
  return lr_min +
         0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

void optimizer_step(std::span<Tensor> params, OptimizerState& state,
                    const OptimizerConfig& config, double lr) {
  if (state.first.empty()) {
    state.first.resize(params.size());
    state.second.resize(params.size());
  }
  if (state.first.size() != params.size()) {
    throw ShapeError("optimizer state holds " +
                     std::to_string(state.first.size()) +
                     " slots but was given " + std::to_string(params.size()) +
                     " parameters");
  }
  ++state.steps;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.steps));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (!p.has_grad()) continue;
    auto w = p.mutable_data();
    auto g = p.grad();
    auto& m = state.first[i];
    if (m.empty()) m.assign(w.size(), 0.0);
    if (m.size() != w.size()) {
      throw ShapeError("optimizer state for parameter " + std::to_string(i) +
                       " has " + std::to_string(m.size()) +
                       " entries, parameter has " + std::to_string(w.size()));
    }
    if (config.kind == OptimizerKind::kSgd) {
      for (std::size_t j = 0; j < w.size(); ++j) {
        double d = g[j] + config.weight_decay * w[j];
        m[j] = config.momentum * m[j] + d;
        w[j] -= lr * m[j];
      }
    } else {
      auto& v = state.second[i];
      if (v.empty()) v.assign(w.size(), 0.0);
      if (v.size() != w.size()) throw ShapeError("AdamW state size mismatch");
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
        v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
        w[j] *= 1.0 - lr * config.weight_decay;
        double mhat = m[j] / bc1;
        double vhat = v[j] / bc2;
        w[j] -= lr * mhat / (std::sqrt(vhat) + config.eps);
      }
    }
  }
}

Optimizer::Optimizer(std::vector<Tensor> params, OptimizerConfig config)
    : params_(std::move(params)), config_(config) {}

double Optimizer::current_lr() const {
  return cosine_lr(config_.lr, config_.lr_min, state_.steps,
                   config_.schedule_steps);
}

void Optimizer::step() {
  optimizer_step(params_, state_, config_, current_lr());
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace acvc::ad
