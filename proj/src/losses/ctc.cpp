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


#include "acvc/losses/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "acvc/losses/losses.hpp"

namespace acvc::losses {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_inputs(std::span<const double> log_probs, std::size_t steps,
                  std::size_t classes, std::span<const std::size_t> targets) {
  if (classes < 2) throw LossError("ctc needs at least one label plus blank");
  if (log_probs.size() != steps * classes) {
    throw LossError("ctc log_probs has " + std::to_string(log_probs.size()) +
                    " entries, expected " + std::to_string(steps) + " x " +
                    std::to_string(classes));
  }
  const std::size_t blank = classes - 1;
  for (std::size_t t : targets) {
    if (t >= blank) {
      throw LossError("ctc target " + std::to_string(t) +
                      " is the blank or out of range");
    }
  }
}

}  // namespace

std::size_t ctc_min_steps(std::span<const std::size_t> targets) {
  std::size_t n = targets.size();
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i] == targets[i - 1]) ++n;
  }
  return n;
}

CtcResult ctc_forward_backward(std::span<const double> log_probs,
                               std::size_t steps, std::size_t classes,
                               std::span<const std::size_t> targets) {
  check_inputs(log_probs, steps, classes, targets);
  CtcResult res;
  res.grad.assign(log_probs.size(), 0.0);
  const std::size_t blank = classes - 1;
  const std::size_t s_len = 2 * targets.size() + 1;
  if (steps == 0 || ctc_min_steps(targets) > steps) {
    res.feasible = false;
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }
  std::vector<std::size_t> ext(s_len, blank);
  for (std::size_t i = 0; i < targets.size(); ++i) ext[2 * i + 1] = targets[i];
  auto lp = [&](std::size_t t, std::size_t s) {
    return log_probs[t * classes + ext[s]];
  };
  // A skip from s - 2 is allowed onto a label that differs from the previous
  // label.
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  std::vector<double> alpha(steps * s_len, kNegInf);
  std::vector<double> beta(steps * s_len, kNegInf);
  alpha[0] = lp(0, 0);
  if (s_len > 1) alpha[1] = lp(0, 1);
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = alpha[(t - 1) * s_len + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * s_len + s - 1]);
      if (can_skip(s)) a = log_add(a, alpha[(t - 1) * s_len + s - 2]);
      alpha[t * s_len + s] = a == kNegInf ? kNegInf : a + lp(t, s);
    }
  }
  // beta excludes the emission at its own step.
  const std::size_t last = steps - 1;
  beta[last * s_len + s_len - 1] = 0.0;
  if (s_len > 1) beta[last * s_len + s_len - 2] = 0.0;
  for (std::size_t t = last; t-- > 0;) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double b = beta[(t + 1) * s_len + s] + lp(t + 1, s);
      if (s + 1 < s_len) {
        b = log_add(b, beta[(t + 1) * s_len + s + 1] + lp(t + 1, s + 1));
      }
      if (s + 2 < s_len && can_skip(s + 2)) {
        b = log_add(b, beta[(t + 1) * s_len + s + 2] + lp(t + 1, s + 2));
      }
      beta[t * s_len + s] = b;
    }
  }
  double log_p = alpha[last * s_len + s_len - 1];
  if (s_len > 1) log_p = log_add(log_p, alpha[last * s_len + s_len - 2]);
  if (log_p == kNegInf) {
    res.feasible = false;
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }
  res.loss = -log_p;
  std::vector<double> acc(classes);
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(acc.begin(), acc.end(), kNegInf);
    for (std::size_t s = 0; s < s_len; ++s) {
      acc[ext[s]] = log_add(acc[ext[s]], alpha[t * s_len + s] + beta[t * s_len + s]);
    }
    for (std::size_t c = 0; c < classes; ++c) {
      if (acc[c] != kNegInf) res.grad[t * classes + c] = -std::exp(acc[c] - log_p);
    }
  }
  return res;
}

double ctc_brute_force(std::span<const double> log_probs, std::size_t steps,
                       std::size_t classes,
                       std::span<const std::size_t> targets) {
  check_inputs(log_probs, steps, classes, targets);
  double paths = 1.0;
  for (std::size_t t = 0; t < steps; ++t) paths *= static_cast<double>(classes);
  if (paths > 1e6) throw LossError("ctc brute force limited to 1e6 paths");
  const std::size_t blank = classes - 1;
  std::vector<std::size_t> digits(steps, 0);
  std::vector<std::size_t> collapsed;
  double log_p = kNegInf;
  for (std::size_t n = 0; n < static_cast<std::size_t>(paths); ++n) {
    std::size_t r = n;
    for (std::size_t t = 0; t < steps; ++t) {
      digits[t] = r % classes;
      r /= classes;
    }
    collapsed.clear();
    for (std::size_t t = 0; t < steps; ++t) {
      if (digits[t] == blank) continue;
      if (t > 0 && digits[t] == digits[t - 1]) continue;
      collapsed.push_back(digits[t]);
    }
    if (!std::equal(collapsed.begin(), collapsed.end(), targets.begin(),
                    targets.end())) {
      continue;
    }
    double s = 0.0;
    for (std::size_t t = 0; t < steps; ++t) s += log_probs[t * classes + digits[t]];
    log_p = log_add(log_p, s);
  }
  return log_p == kNegInf ? std::numeric_limits<double>::infinity() : -log_p;
}

ad::Tensor ctc_loss(const ad::Tensor& log_probs,
                    std::span<const std::size_t> targets) {
  if (log_probs.rank() != 2) {
    throw LossError("ctc_loss expects [T x classes] log-probabilities, got " +
                    ad::shape_string(log_probs.shape()));
  }
  const std::size_t steps = log_probs.dim(0), classes = log_probs.dim(1);
  CtcResult r = ctc_forward_backward(log_probs.data(), steps, classes, targets);
  if (!r.feasible) {
    throw InfeasibleAlignment(
        "ctc: " + std::to_string(targets.size()) + " targets need " +
        std::to_string(ctc_min_steps(targets)) + " steps, only " +
        std::to_string(steps) + " available");
  }
  auto grad = std::make_shared<std::vector<double>>(std::move(r.grad));
  return ad::detail::make_result(
      "ctc", {1}, {r.loss}, {log_probs}, [grad](ad::detail::Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.ensure_grad();
        const double up = self.grad[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * (*grad)[i];
      });
}

}  // namespace acvc::losses
