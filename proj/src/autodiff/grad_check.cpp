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

#include "acvc/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace acvc::ad {

namespace {

double eval_scalar(const std::function<Tensor()>& f) {
  NoGradGuard guard;
  Tensor y = f();
  if (y.numel() != 1) throw GraphError("grad_check function must be scalar");
  double v = y.item();
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& f,
                           std::span<Tensor> leaves, double eps,
                           std::size_t max_entries_per_leaf) {
  std::vector<bool> prior(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    prior[i] = leaves[i].requires_grad();
    leaves[i].set_requires_grad(true);
    leaves[i].zero_grad();
  }
  Tensor y = f();
  if (!std::isfinite(y.item())) throw NumericError("grad_check: non-finite value");
  backward(y);

  GradCheckResult result;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor& leaf = leaves[li];
    std::vector<double> analytic(leaf.numel(), 0.0);
    if (leaf.has_grad()) {
      auto g = leaf.grad();
      std::copy(g.begin(), g.end(), analytic.begin());
    }
    std::size_t n = leaf.numel();
    std::size_t step = 1;
    if (max_entries_per_leaf != 0 && n > max_entries_per_leaf) {
      step = (n + max_entries_per_leaf - 1) / max_entries_per_leaf;
    }
    auto data = leaf.mutable_data();
    for (std::size_t i = 0; i < n; i += step) {
      double orig = data[i];
      data[i] = orig + eps;
      double fp = eval_scalar(f);
      data[i] = orig - eps;
      double fm = eval_scalar(f);
      data[i] = orig;
      double numeric = (fp - fm) / (2.0 * eps);
      double err = std::fabs(analytic[i] - numeric) /
                   std::max(1.0, std::fabs(numeric));
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = err;
        result.worst_leaf = li;
        result.worst_index = i;
        result.analytic = analytic[i];
        result.numeric = numeric;
      }
    }
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    leaves[i].zero_grad();
    leaves[i].set_requires_grad(prior[i]);
  }
  return result;
}

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double eps) {
  Tensor leaf = x.detach();
  Tensor leaves[] = {leaf};
  return grad_check([&] { return f(leaf); }, leaves, eps);
}

}  // namespace acvc::ad
