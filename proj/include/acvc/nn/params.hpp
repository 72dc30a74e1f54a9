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
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "acvc/autodiff/tensor.hpp"

namespace acvc::nn {

// Storage precision of parameter values. Arithmetic is always double; in
// kFloat32 mode values are rounded to the nearest float at initialization and
// after every update, which makes float32 checkpoints lossless.
enum class Precision { kFloat32, kFloat64 };

class ParamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named parameter set of one model. Trainable parameters carry
// requires_grad unless the store is frozen; buffers (batch-norm statistics)
// never do but are persisted alongside parameters.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    ad::Tensor tensor;
    bool trainable;
  };

  explicit ParamStore(std::uint64_t seed = 0,
                      Precision precision = Precision::kFloat32);

  // Uniform(-bound, bound) initialization.
  ad::Tensor parameter(const std::string& name, ad::Shape shape, double bound);
  ad::Tensor constant(const std::string& name, ad::Shape shape, double value);
  ad::Tensor buffer(const std::string& name, ad::Shape shape, double value);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<ad::Tensor> trainable() const;
  const ad::Tensor& find(const std::string& name) const;
  bool contains(const std::string& name) const;

  // Scalar counts. trainable_count() is 0 while frozen.
  std::size_t parameter_count() const;
  std::size_t trainable_count() const;

  void set_frozen(bool frozen);
  bool frozen() const { return frozen_; }
  void zero_grad();
  double grad_norm() const;
  void round_to_storage();
  double round(double v) const;

  Precision precision() const { return precision_; }
  std::mt19937_64& init_rng() { return rng_; }

 private:
  ad::Tensor add(const std::string& name, ad::Shape shape,
                 std::vector<double> values, bool trainable);

  std::vector<Entry> entries_;
  Precision precision_;
  std::mt19937_64 rng_;
  bool frozen_ = false;
};

// Per-call mode. Dropout and batch-statistics updates only happen in
// training mode, which needs an rng.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;
  double dropout = 0.1;
  // Training mode only: batch norm still updates its running averages from
  // the batch but normalizes with them (as constants) instead of the batch
  // statistics, so training and inference compute the same function.
  bool running_statistics = false;
};

}  // namespace acvc::nn
