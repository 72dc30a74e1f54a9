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


#include <array>
#include <cstdint>
#include <string>

#include "acvc/text/text.hpp"

namespace acvc::text {

namespace {

constexpr std::array<const char*, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",
    "five",    "six",     "seven",     "eight",    "nine",
    "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
constexpr std::array<const char*, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty",
    "ninety"};

// ASCII replacement for U+00C0..U+00FF; "" drops, " " separates.
constexpr std::array<const char*, 64> kLatin1 = {
    "a", "a", "a", "a", "a", "a", "ae", "c",   // C0-C7
    "e", "e", "e", "e", "i", "i", "i",  "i",   // C8-CF
    "d", "n", "o", "o", "o", "o", "o",  " ",   // D0-D7 (D7 multiplication)
    "o", "u", "u", "u", "u", "y", "th", "ss",  // D8-DF
    "a", "a", "a", "a", "a", "a", "ae", "c",   // E0-E7
    "e", "e", "e", "e", "i", "i", "i",  "i",   // E8-EF
    "d", "n", "o", "o", "o", "o", "o",  " ",   // F0-F7 (F7 division)
    "o", "u", "u", "u", "u", "y", "th", "y"};  // F8-FF

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string expand_numbers(std::string_view raw,
                           std::vector<std::string>* flagged) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!is_digit(raw[i])) {
      out.push_back(raw[i++]);
      continue;
    }
    std::size_t j = i;
    long value = 0;
    while (j < raw.size() && is_digit(raw[j])) {
      if (value <= 9999) value = value * 10 + (raw[j] - '0');
      ++j;
    }
    std::string_view run = raw.substr(i, j - i);
    if (value <= 9999) {
      out += ' ';
      out += number_to_words(static_cast<int>(value));
      out += ' ';
    } else {
      out += run;
      if (flagged) flagged->emplace_back(run);
    }
    i = j;
  }
  return out;
}

// Decodes one UTF-8 sequence starting at s[i]; invalid bytes yield
// U+FFFD and advance by one.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3
                                  : (b0 & 0xF8) == 0xF0 ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = b0 & (0x7F >> len);
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

}  // namespace

std::string number_to_words(int n) {
  if (n < 0 || n > 9999) {
    throw TextError("number_to_words covers 0-9999, got " + std::to_string(n));
  }
  if (n < 20) return kOnes[n];
  std::string out;
  auto append = [&out](const std::string& w) {
    if (!out.empty()) out += ' ';
    out += w;
  };
  if (n >= 1000) {
    append(std::string(kOnes[n / 1000]) + " thousand");
    n %= 1000;
  }
  if (n >= 100) {
    append(std::string(kOnes[n / 100]) + " hundred");
    n %= 100;
  }
  if (n >= 20) {
    append(kTens[n / 10]);
    n %= 10;
    if (n > 0) append(kOnes[n]);
  } else if (n > 0) {
    append(kOnes[n]);
  }
  return out;
}

std::string normalize_text(std::string_view raw,
                           std::vector<std::string>* flagged) {
  const std::string expanded = expand_numbers(raw, flagged);
  std::string mapped;
  mapped.reserve(expanded.size());
  std::size_t i = 0;
  while (i < expanded.size()) {
    char32_t cp = next_code_point(expanded, i);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (c >= 'A' && c <= 'Z') {
        mapped.push_back(static_cast<char>(c - 'A' + 'a'));
      } else if ((c >= 'a' && c <= 'z') || is_digit(c)) {
        mapped.push_back(c);
      } else if (c != '\'') {
        mapped.push_back(' ');
      }
    } else if (cp >= 0xC0 && cp <= 0xFF) {
      mapped += kLatin1[cp - 0xC0];
    } else if (cp == 0x2018 || cp == 0x2019 || cp == 0x02BC) {
      // typographic apostrophes
    } else if ((cp >= 0xA0 && cp < 0xC0) || (cp >= 0x2000 && cp <= 0x206F) ||
               (cp >= 0x3000 && cp <= 0x303F)) {
      mapped.push_back(' ');
    }
  }
  std::string out;
  out.reserve(mapped.size());
  for (char c : mapped) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace acvc::text
