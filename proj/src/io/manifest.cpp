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


#include "acvc/io/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace acvc::io {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ManifestError(line, std::string("missing field \"") + key + "\"");
  }
  return *it;
}

std::string string_field(const json& obj, const char* key, std::size_t line) {
  const json& v = field(obj, key, line);
  if (!v.is_string()) {
    throw ManifestError(line, std::string("field \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

ManifestRecord parse_line(const std::string& text, std::size_t line,
                          std::size_t accent_classes) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ManifestError(line, "expected a JSON object");
  ManifestRecord r;
  r.audio_filepath = string_field(obj, "audio_filepath", line);
  r.text = string_field(obj, "text", line);
  r.gender = string_field(obj, "gender", line);
  if (r.gender != "female" && r.gender != "male") {
    throw ManifestError(line, "gender must be \"female\" or \"male\", got \"" +
                                  r.gender + "\"");
  }
  const json& speaker = field(obj, "speaker", line);
  if (speaker.is_string()) {
    r.speaker = speaker.get<std::string>();
  } else if (speaker.is_number_integer()) {
    r.speaker = std::to_string(speaker.get<long long>());
  } else {
    throw ManifestError(line, "field \"speaker\" must be a string or integer");
  }
  const json& accent = field(obj, "accent", line);
  if (!accent.is_number_integer() || accent.get<long long>() < 0 ||
      static_cast<std::size_t>(accent.get<long long>()) >= accent_classes) {
    throw ManifestError(line, "field \"accent\" must be an integer class in [0, " +
                                  std::to_string(accent_classes) + ")");
  }
  r.accent = static_cast<std::size_t>(accent.get<long long>());
  const json& duration = field(obj, "duration", line);
  if (!duration.is_number()) {
    throw ManifestError(line, "field \"duration\" must be a number");
  }
  r.duration = duration.get<double>();
  if (!std::isfinite(r.duration) || r.duration <= 0.0) {
    throw ManifestError(line, "duration must be positive, got " +
                                  std::to_string(r.duration));
  }
  return r;
}

}  // namespace

std::size_t gender_index(const std::string& gender) {
  if (gender == "female") return 0;
  if (gender == "male") return 1;
  throw ManifestError(0, "gender must be \"female\" or \"male\", got \"" + gender + "\"");
}

const char* gender_name(std::size_t index) {
  return index == 0 ? "female" : "male";
}

std::vector<ManifestRecord> parse_manifest(std::string_view content,
                                           std::size_t accent_classes) {
  std::vector<ManifestRecord> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string line(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_line(line, line_no, accent_classes));
  }
  return out;
}

std::vector<ManifestRecord> read_manifest(const std::string& path,
                                          std::size_t accent_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), accent_classes);
}

std::string serialize_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["audio_filepath"] = r.audio_filepath;
    obj["text"] = r.text;
    obj["accent"] = r.accent;
    obj["gender"] = r.gender;
    obj["speaker"] = r.speaker;
    obj["duration"] = r.duration;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ManifestError(0, "cannot write " + path);
  out << serialize_manifest(records);
  if (!out) throw ManifestError(0, "write failed for " + path);
}

}  // namespace acvc::io
