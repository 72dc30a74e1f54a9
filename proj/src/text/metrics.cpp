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


#include <cmath>
#include <numeric>
#include <string>

#include "acvc/text/metrics.hpp"

namespace acvc::text {

EditCounts align(std::span<const std::string> ref,
                 std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [m, &d](std::size_t i, std::size_t j) -> std::size_t& {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts c;
  c.reference_units = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

MetricReport wer_cer(std::string_view reference, std::string_view hypothesis) {
  auto ref_words = split_words(reference);
  if (ref_words.empty()) {
    throw TextError("WER/CER undefined for an empty reference");
  }
  auto hyp_words = split_words(hypothesis);
  std::vector<std::string> ref_chars, hyp_chars;
  for (char c : reference) ref_chars.emplace_back(1, c);
  for (char c : hypothesis) hyp_chars.emplace_back(1, c);
  MetricReport r;
  r.words = align(ref_words, hyp_words);
  r.chars = align(ref_chars, hyp_chars);
  r.wer = r.words.rate();
  r.cer = r.chars.rate();
  return r;
}

MeanCi mos_ci(std::span<const double> ratings) {
  if (ratings.empty()) throw TextError("mos_ci needs at least one rating");
  for (double r : ratings) {
    if (!(r >= 1.0 && r <= 5.0)) {
      throw TextError("rating " + std::to_string(r) + " outside [1, 5]");
    }
  }
  const double n = static_cast<double>(ratings.size());
  MeanCi out;
  out.mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / n;
  if (ratings.size() == 1) return out;
  double ss = 0.0;
  for (double r : ratings) ss += (r - out.mean) * (r - out.mean);
  out.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace acvc::text
