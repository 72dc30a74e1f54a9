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


#include "acvc/io/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace acvc::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::string content = trim(line);
    if (content.empty()) continue;
    std::size_t eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    std::string key = trim(std::string_view(content).substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[key] = trim(std::string_view(content).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::contains(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key " + key + " is not a number: " + it->second);
}

long Config::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long v = 0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key " + key + " is not an integer: " + s);
  }
  return v;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

audio::DspConfig dsp_from_config(const Config& cfg, audio::DspConfig base) {
  base.sample_rate = static_cast<int>(cfg.get_int("dsp.sample_rate", base.sample_rate));
  base.win_size = static_cast<std::size_t>(
      cfg.get_int("dsp.win_size", static_cast<long>(base.win_size)));
  base.hop_size = static_cast<std::size_t>(
      cfg.get_int("dsp.hop_size", static_cast<long>(base.hop_size)));
  base.n_mels = static_cast<std::size_t>(
      cfg.get_int("dsp.n_mels", static_cast<long>(base.n_mels)));
  base.f_min = cfg.get_double("dsp.f_min", base.f_min);
  base.f_max = cfg.get_double("dsp.f_max", base.f_max);
  base.log_floor = cfg.get_double("dsp.log_floor", base.log_floor);
  base.validate();
  return base;
}

}  // namespace acvc::io
