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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "acvc/models/models.hpp"
#include "acvc/nn/params.hpp"

namespace acvc::io {

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kVersion, kMalformed, kShapeMismatch, kMissing };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Layout, all integers little-endian:
//   "ACVC" u32 version
//   u32 n_meta, n_meta x (u32 len, key bytes, u32 len, value bytes)
//   u32 n_entries, n_entries x
//     (u32 len, name bytes, u32 ndim, ndim x u64 dim, u8 dtype = 1, f32 data)
struct CheckpointEntry {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<float> data;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::map<std::string, std::string> metadata;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Appends every tensor of `store` (parameters and buffers) as prefix + name.
void capture(const nn::ParamStore& store, const std::string& prefix,
             Checkpoint& ckpt);
// Copies prefix + name entries into `store`. Throws kShapeMismatch naming
// the first tensor whose shape differs and kMissing for absent tensors.
void restore(nn::ParamStore& store, const std::string& prefix,
             const Checkpoint& ckpt);

// Bundle files carry the preset name, the ablation flag and the DSP
// settings as metadata.
void save_bundle(const models::ModelBundle& bundle, const std::string& path,
                 const std::map<std::string, std::string>& extra = {});
models::ModelBundle load_bundle(const std::string& path);
// Loads into an already-built bundle (used to detect preset mismatches).
void load_into(models::ModelBundle& bundle, const Checkpoint& ckpt);

}  // namespace acvc::io
