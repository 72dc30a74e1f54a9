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

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "acvc/audio/types.hpp"

namespace acvc::io {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// "key = value" lines; '#' starts a comment. Later keys override earlier.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool contains(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Applies dsp.* keys (sample_rate, win_size, hop_size, n_mels, f_min, f_max,
// log_floor) over `base`.
audio::DspConfig dsp_from_config(const Config& cfg,
                                 audio::DspConfig base = {});

}  // namespace acvc::io
