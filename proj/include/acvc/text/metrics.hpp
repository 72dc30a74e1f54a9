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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acvc/text/text.hpp"

namespace acvc::text {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_units = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  double rate() const {
    return static_cast<double>(errors()) / static_cast<double>(reference_units);
  }
};

struct MetricReport {
  EditCounts words;
  EditCounts chars;  // spaces count as characters
  double wer = 0.0;
  double cer = 0.0;
};

// Levenshtein alignment with unit costs. The backtrace prefers a
// substitution (or match) over a deletion, and a deletion over an insertion,
// when several moves reach the same cost.
EditCounts align(std::span<const std::string> reference,
                 std::span<const std::string> hypothesis);

std::vector<std::string> split_words(std::string_view text);

// Throws TextError when the reference has no words.
MetricReport wer_cer(std::string_view reference, std::string_view hypothesis);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 s / sqrt(n), sample s; 0 when n == 1
};

// Ratings must lie in [1, 5]; throws TextError on an empty list.
MeanCi mos_ci(std::span<const double> ratings);

}  // namespace acvc::text
