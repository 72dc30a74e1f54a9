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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acvc::io {

class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "manifest line " + std::to_string(line) +
                                      ": " + what
                                : "manifest: " + what),
        line_(line) {}
  // 1-based; 0 for file-level failures.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ManifestRecord {
  std::string audio_filepath;
  std::string text;
  std::size_t accent = 0;  // class index
  std::string gender;      // "female" or "male"
  std::string speaker;
  double duration = 0.0;  // seconds, > 0

  bool operator==(const ManifestRecord&) const = default;
};

std::size_t gender_index(const std::string& gender);
const char* gender_name(std::size_t index);

// One JSON object per non-blank line. All-or-nothing.
std::vector<ManifestRecord> parse_manifest(std::string_view content,
                                           std::size_t accent_classes = 40);
std::vector<ManifestRecord> read_manifest(const std::string& path,
                                          std::size_t accent_classes = 40);
std::string serialize_manifest(const std::vector<ManifestRecord>& records);
void write_manifest(const std::string& path,
                    const std::vector<ManifestRecord>& records);

}  // namespace acvc::io
