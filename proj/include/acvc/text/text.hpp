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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace acvc::text {

class TextError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Lowercase ASCII with words separated by single spaces. Digit runs with
// values 0-9999 become English cardinals (before lowercasing); larger runs
// stay as digits and are appended to `flagged` when given. Latin-1 letters
// are transliterated (e -> e, ss, ae, th, ...), apostrophes deleted, other
// punctuation and symbols become spaces, remaining non-ASCII is dropped.
std::string normalize_text(std::string_view raw,
                           std::vector<std::string>* flagged = nullptr);

// English cardinal for 0 <= n <= 9999, words separated by spaces.
std::string number_to_words(int n);

// Greedy longest-match tokenizer over a fixed unit list. Line i of the
// vocabulary file is unit i; "<unk>" and "<space>" are reserved names.
class Tokenizer {
 public:
  static constexpr std::size_t kMaxUnits = 128;
  static constexpr std::size_t kBlank = kMaxUnits;
  static constexpr std::size_t kClasses = kMaxUnits + 1;

  explicit Tokenizer(std::vector<std::string> units);
  static Tokenizer from_file(const std::string& path);
  // The vocabulary shipped in the data directory.
  static Tokenizer builtin();

  std::size_t size() const { return units_.size(); }
  std::size_t unk_id() const { return unk_; }
  const std::string& unit(std::size_t id) const;

  std::vector<std::size_t> encode(std::string_view text) const;
  // <unk> decodes to nothing.
  std::string decode(std::span<const std::size_t> ids) const;

 private:
  std::vector<std::string> units_;  // surface strings
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t unk_ = 0;
  std::size_t longest_ = 1;
};

std::string default_vocabulary_path();

// Per-step argmax over [steps x classes] log-probabilities (blank last), then
// merge repeats and drop blanks.
std::vector<std::size_t> greedy_ctc_ids(std::span<const double> log_probs,
                                        std::size_t steps, std::size_t classes);
std::string greedy_ctc_decode(std::span<const double> log_probs,
                              std::size_t steps, std::size_t classes,
                              const Tokenizer& tok);

}  // namespace acvc::text
