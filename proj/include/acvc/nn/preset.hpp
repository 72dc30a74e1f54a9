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
#include <string>
#include <vector>

namespace acvc::nn {

struct JasperConfig {
  std::vector<std::size_t> widths;   // one per residual block
  std::vector<std::size_t> kernels;  // one per residual block, odd
  std::size_t sub_blocks = 3;
};

struct PoolingDecoderConfig {
  std::size_t attention_dim = 128;
  std::size_t embedding_dim = 192;
};

struct SincConfig {
  std::size_t channels = 80;
  std::size_t kernel = 251;  // odd
  std::size_t stride = 10;
  int sample_rate = 16000;
  double min_low_hz = 50.0;
  double min_band_hz = 50.0;
};

struct XVectorConfig {
  std::vector<std::size_t> widths;  // five frame-level layers
  std::size_t embedding_dim = 512;
};

struct ConformerConfig {
  std::size_t d_model = 512;
  std::size_t heads = 8;
  std::size_t ffn_dim = 2048;
  std::size_t conv_kernel = 31;
  std::size_t layers = 12;
};

struct FftConfig {
  std::size_t d_model = 384;
  std::size_t heads = 2;
  std::size_t d_inner = 1536;
  std::size_t kernel = 3;
};

struct StsStacks {
  std::size_t encoder = 6;
  std::size_t accent = 1;
  std::size_t speaker = 1;
  std::size_t decoder = 6;
};

// Every architectural size in one place. Embedding sizes (192 accent and
// gender, 512 speaker), the 80 mel bands and the 128-unit vocabulary are
// shared by all presets.
struct BlockPreset {
  std::string name;
  JasperConfig jasper;
  PoolingDecoderConfig decoder;
  SincConfig sinc;
  XVectorConfig xvector;
  ConformerConfig conformer;
  FftConfig stp_accent;
  std::size_t stp_accent_stacks = 2;
  FftConfig sts;
  StsStacks sts_stacks;
  std::size_t n_mels = 80;
  std::size_t accent_classes = 40;
  std::size_t gender_classes = 2;
  std::size_t vocab_size = 128;
  double dropout = 0.1;

  std::size_t accent_dim() const { return decoder.embedding_dim; }
  std::size_t speaker_dim() const { return xvector.embedding_dim; }
  std::size_t token_classes() const { return vocab_size + 1; }
};

BlockPreset full_preset();
BlockPreset toy_preset();
// "full" or "toy"; throws std::invalid_argument otherwise.
BlockPreset preset_by_name(const std::string& name);

}  // namespace acvc::nn
