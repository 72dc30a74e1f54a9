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


#include "acvc/nn/params.hpp"

#include <cmath>

namespace acvc::nn {

ParamStore::ParamStore(std::uint64_t seed, Precision precision)
    : precision_(precision), rng_(seed) {}

double ParamStore::round(double v) const {
  return precision_ == Precision::kFloat32
             ? static_cast<double>(static_cast<float>(v))
             : v;
}

ad::Tensor ParamStore::add(const std::string& name, ad::Shape shape,
                           std::vector<double> values, bool trainable) {
  if (contains(name)) throw ParamError("duplicate parameter name: " + name);
  for (auto& v : values) v = round(v);
  ad::Tensor t = ad::Tensor::from_vector(std::move(shape), std::move(values),
                                         trainable && !frozen_);
  entries_.push_back({name, t, trainable});
  return t;
}

ad::Tensor ParamStore::parameter(const std::string& name, ad::Shape shape,
                                 double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(ad::shape_numel(shape));
  for (auto& x : v) x = dist(rng_);
  return add(name, std::move(shape), std::move(v), true);
}

ad::Tensor ParamStore::constant(const std::string& name, ad::Shape shape,
                                double value) {
  std::vector<double> v(ad::shape_numel(shape), value);
  return add(name, std::move(shape), std::move(v), true);
}

ad::Tensor ParamStore::buffer(const std::string& name, ad::Shape shape,
                              double value) {
  std::vector<double> v(ad::shape_numel(shape), value);
  return add(name, std::move(shape), std::move(v), false);
}

std::vector<ad::Tensor> ParamStore::trainable() const {
  std::vector<ad::Tensor> out;
  for (const auto& e : entries_) {
    if (e.trainable) out.push_back(e.tensor);
  }
  return out;
}

const ad::Tensor& ParamStore::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ParamError("no parameter named " + name);
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.trainable) n += e.tensor.numel();
  }
  return n;
}

std::size_t ParamStore::trainable_count() const {
  return frozen_ ? 0 : parameter_count();
}

void ParamStore::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& e : entries_) {
    if (e.trainable) {
      e.tensor.zero_grad();
      e.tensor.set_requires_grad(!frozen);
    }
  }
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) {
    if (!e.tensor.has_grad()) continue;
    for (double g : e.tensor.grad()) s += g * g;
  }
  return std::sqrt(s);
}

void ParamStore::round_to_storage() {
  if (precision_ != Precision::kFloat32) return;
  for (auto& e : entries_) {
    ad::Tensor t = e.tensor;
    for (auto& v : t.mutable_data()) v = round(v);
  }
}

}  // namespace acvc::nn
