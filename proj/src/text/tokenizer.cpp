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


#include <algorithm>
#include <fstream>
#include <string>

#include "acvc/text/text.hpp"

#ifndef ACVC_DATA_DIR
#define ACVC_DATA_DIR "data"
#endif

namespace acvc::text {

std::string default_vocabulary_path() {
  return std::string(ACVC_DATA_DIR) + "/vocab.txt";
}

Tokenizer::Tokenizer(std::vector<std::string> units) {
  if (units.empty() || units.size() > kMaxUnits) {
    throw TextError("vocabulary must hold 1-" + std::to_string(kMaxUnits) +
                    " units, got " + std::to_string(units.size()));
  }
  bool has_unk = false;
  for (std::size_t id = 0; id < units.size(); ++id) {
    std::string surface = units[id];
    if (surface == "<unk>") {
      has_unk = true;
      unk_ = id;
      surface.clear();
    } else if (surface == "<space>") {
      surface = " ";
    } else if (surface.empty()) {
      throw TextError("vocabulary line " + std::to_string(id + 1) +
                      " is empty");
    }
    if (!surface.empty()) {
      if (!index_.emplace(surface, id).second) {
        throw TextError("duplicate vocabulary unit '" + units[id] + "'");
      }
      longest_ = std::max(longest_, surface.size());
    }
    units_.push_back(std::move(surface));
  }
  if (!has_unk) throw TextError("vocabulary lacks the <unk> unit");
}

Tokenizer Tokenizer::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TextError("cannot open vocabulary " + path);
  std::vector<std::string> units;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    units.push_back(line);
  }
  while (!units.empty() && units.back().empty()) units.pop_back();
  return Tokenizer(std::move(units));
}

Tokenizer Tokenizer::builtin() { return from_file(default_vocabulary_path()); }

const std::string& Tokenizer::unit(std::size_t id) const {
  if (id >= units_.size()) {
    throw TextError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return units_[id];
}

std::vector<std::size_t> Tokenizer::encode(std::string_view text) const {
  std::vector<std::size_t> ids;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t n = std::min(longest_, text.size() - i);
    bool matched = false;
    for (; n > 0; --n) {
      auto it = index_.find(std::string(text.substr(i, n)));
      if (it != index_.end()) {
        ids.push_back(it->second);
        i += n;
        matched = true;
        break;
      }
    }
    if (!matched) {
      ids.push_back(unk_);
      ++i;
    }
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const std::size_t> ids) const {
  std::string out;
  for (std::size_t id : ids) out += unit(id);
  return out;
}

std::vector<std::size_t> greedy_ctc_ids(std::span<const double> log_probs,
                                        std::size_t steps,
                                        std::size_t classes) {
  if (classes < 2 || log_probs.size() != steps * classes) {
    throw TextError("greedy decode expects [steps x classes] log-probs");
  }
  const std::size_t blank = classes - 1;
  std::vector<std::size_t> ids;
  std::size_t prev = blank;
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = log_probs.subspan(t * classes, classes);
    std::size_t best = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    if (best != blank && best != prev) ids.push_back(best);
    prev = best;
  }
  return ids;
}

std::string greedy_ctc_decode(std::span<const double> log_probs,
                              std::size_t steps, std::size_t classes,
                              const Tokenizer& tok) {
  std::vector<std::size_t> ids;
  for (std::size_t id : greedy_ctc_ids(log_probs, steps, classes)) {
    if (id < tok.size()) ids.push_back(id);
  }
  return tok.decode(ids);
}

}  // namespace acvc::text
