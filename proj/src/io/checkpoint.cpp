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


#include "acvc/io/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <string_view>
#include <type_traits>

namespace acvc::io {

namespace {

using Kind = CheckpointError::Kind;

constexpr char kMagic[4] = {'A', 'C', 'V', 'C'};
constexpr std::uint8_t kDtypeF32 = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw CheckpointError(Kind::kIo, "cannot write checkpoint " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(const std::vector<float>& v) {
    std::vector<unsigned char> buf(v.size() * 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, &v[i], 4);
      for (int k = 0; k < 4; ++k) {
        buf[i * 4 + k] = static_cast<unsigned char>(bits >> (8 * k));
      }
    }
    bytes(buf.data(), buf.size());
  }
  void finish() {
    out_.flush();
    if (!out_) throw CheckpointError(Kind::kIo, "write failed for " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw CheckpointError(Kind::kIo, "cannot open checkpoint " + path);
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0);
  }
  void bytes(void* p, std::uint64_t n, const char* what) {
    if (n > remaining_) {
      throw CheckpointError(Kind::kMalformed, "checkpoint " + path_ +
                                                  " truncated while reading " +
                                                  what);
    }
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw CheckpointError(Kind::kIo, "read failed for " + path_);
    remaining_ -= n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    bytes(&v, 1, what);
    return v;
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::string str(const char* what) {
    std::uint32_t n = u32(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  std::vector<float> floats(std::uint64_t n, const std::string& what) {
    if (n > remaining_ / 4) {
      throw CheckpointError(Kind::kMalformed,
                            "checkpoint " + path_ + " truncated in " + what);
    }
    std::vector<unsigned char> buf(n * 4);
    bytes(buf.data(), buf.size(), "tensor data");
    std::vector<float> v(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) {
        bits |= static_cast<std::uint32_t>(buf[i * 4 + k]) << (8 * k);
      }
      std::memcpy(&v[i], &bits, 4);
    }
    return v;
  }
  std::uint64_t remaining() const { return remaining_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::uint64_t remaining_ = 0;
};

std::string shape_text(const std::vector<std::uint64_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += " x ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::set<std::string> seen;
  for (const auto& e : ckpt.entries) {
    if (!seen.insert(e.name).second) {
      throw CheckpointError(Kind::kMalformed, "duplicate tensor name " + e.name);
    }
    std::uint64_t n = 1;
    for (auto d : e.shape) n *= d;
    if (n != e.data.size()) {
      throw CheckpointError(Kind::kMalformed,
                            "tensor " + e.name + " declares " + shape_text(e.shape) +
                                " but holds " + std::to_string(e.data.size()) +
                                " values");
    }
  }
  Writer w(path);
  w.bytes(kMagic, 4);
  w.u32(Checkpoint::kVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    w.str(e.name);
    w.u32(static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) w.u64(d);
    w.u8(kDtypeF32);
    w.floats(e.data);
  }
  w.finish();
}

Checkpoint read_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[4] = {};
  if (r.remaining() < 4) {
    throw CheckpointError(Kind::kBadMagic, path + " is too short to be a checkpoint");
  }
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError(Kind::kBadMagic, path + " does not start with ACVC");
  }
  std::uint32_t version = r.u32("version");
  if (version != Checkpoint::kVersion) {
    throw CheckpointError(Kind::kVersion,
                          path + " has format version " + std::to_string(version) +
                              ", expected " + std::to_string(Checkpoint::kVersion));
  }
  Checkpoint ckpt;
  std::uint32_t n_meta = r.u32("metadata count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str("metadata key");
    ckpt.metadata[k] = r.str("metadata value");
  }
  std::uint32_t n = r.u32("entry count");
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < n; ++i) {
    CheckpointEntry e;
    e.name = r.str("tensor name");
    if (!seen.insert(e.name).second) {
      throw CheckpointError(Kind::kMalformed, "duplicate tensor name " + e.name);
    }
    std::uint32_t ndim = r.u32("rank");
    if (ndim > 8) {
      throw CheckpointError(Kind::kMalformed,
                            "tensor " + e.name + " has implausible rank " +
                                std::to_string(ndim));
    }
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      e.shape.push_back(r.u64("dimension"));
      if (e.shape.back() != 0 && count > r.remaining() / e.shape.back()) {
        throw CheckpointError(Kind::kMalformed,
                              "tensor " + e.name + " is larger than the file");
      }
      count *= e.shape.back();
    }
    std::uint8_t dtype = r.u8("dtype");
    if (dtype != kDtypeF32) {
      throw CheckpointError(Kind::kMalformed, "tensor " + e.name +
                                                  " has unsupported dtype " +
                                                  std::to_string(dtype));
    }
    e.data = r.floats(count, e.name);
    ckpt.entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw CheckpointError(Kind::kMalformed,
                          path + " has " + std::to_string(r.remaining()) +
                              " trailing bytes");
  }
  return ckpt;
}

void capture(const nn::ParamStore& store, const std::string& prefix,
             Checkpoint& ckpt) {
  for (const auto& e : store.entries()) {
    CheckpointEntry c;
    c.name = prefix + e.name;
    for (auto d : e.tensor.shape()) c.shape.push_back(d);
    auto v = e.tensor.data();
    c.data.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) c.data[i] = static_cast<float>(v[i]);
    ckpt.entries.push_back(std::move(c));
  }
}

void restore(nn::ParamStore& store, const std::string& prefix,
             const Checkpoint& ckpt) {
  std::set<std::string> expected;
  for (const auto& e : store.entries()) {
    const std::string name = prefix + e.name;
    expected.insert(name);
    const CheckpointEntry* c = ckpt.find(name);
    if (c == nullptr) {
      throw CheckpointError(Kind::kMissing, "checkpoint lacks tensor " + name);
    }
    std::vector<std::uint64_t> shape(e.tensor.shape().begin(),
                                     e.tensor.shape().end());
    if (c->shape != shape) {
      throw CheckpointError(Kind::kShapeMismatch,
                            "tensor " + name + " is " + shape_text(c->shape) +
                                " in the checkpoint but " + shape_text(shape) +
                                " in the model");
    }
  }
  for (const auto& c : ckpt.entries) {
    if (c.name.rfind(prefix, 0) == 0 && !expected.count(c.name)) {
      throw CheckpointError(Kind::kShapeMismatch,
                            "checkpoint tensor " + c.name +
                                " has no counterpart in the model");
    }
  }
  for (const auto& e : store.entries()) {
    const CheckpointEntry* c = ckpt.find(prefix + e.name);
    ad::Tensor t = e.tensor;
    auto dst = t.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = c->data[i];
  }
}

namespace {

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_bundle(const models::ModelBundle& bundle, const std::string& path,
                 const std::map<std::string, std::string>& extra) {
  Checkpoint ckpt;
  ckpt.metadata = extra;
  ckpt.metadata["preset"] = bundle.preset.name;
  ckpt.metadata["ablation"] = bundle.ablation ? "1" : "0";
  ckpt.metadata["mel_normalization"] = "none";
  std::string trained;
  for (const auto& stage : bundle.trained) {
    trained += (trained.empty() ? "" : ",") + stage;
  }
  ckpt.metadata["trained"] = trained;
  if (bundle.vocoder) {
    const auto& d = bundle.vocoder->config();
    ckpt.metadata["vocoder"] = bundle.vocoder->name();
    ckpt.metadata["dsp.sample_rate"] = std::to_string(d.sample_rate);
    ckpt.metadata["dsp.win_size"] = std::to_string(d.win_size);
    ckpt.metadata["dsp.hop_size"] = std::to_string(d.hop_size);
    ckpt.metadata["dsp.n_mels"] = std::to_string(d.n_mels);
    ckpt.metadata["dsp.f_min"] = exact(d.f_min);
    ckpt.metadata["dsp.f_max"] = exact(d.f_max);
  }
  for (const auto& [name, store] : bundle.stores()) {
    capture(*store, name + ".", ckpt);
  }
  write_checkpoint(ckpt, path);
}

void load_into(models::ModelBundle& bundle, const Checkpoint& ckpt) {
  auto it = ckpt.metadata.find("ablation");
  if (it != ckpt.metadata.end() && (it->second == "1") != bundle.ablation) {
    throw CheckpointError(Kind::kShapeMismatch,
                          "checkpoint ablation flag does not match the bundle");
  }
  for (auto& [name, store] : bundle.stores()) restore(*store, name + ".", ckpt);
}

models::ModelBundle load_bundle(const std::string& path) {
  Checkpoint ckpt = read_checkpoint(path);
  auto preset = ckpt.metadata.find("preset");
  if (preset == ckpt.metadata.end()) {
    throw CheckpointError(Kind::kMalformed, path + " does not name a preset");
  }
  nn::BlockPreset p;
  try {
    p = nn::preset_by_name(preset->second);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(Kind::kMalformed, path + ": " + e.what());
  }
  bool ablation = ckpt.metadata.count("ablation") && ckpt.metadata.at("ablation") == "1";
  models::ModelBundle bundle = models::ModelBundle::create(p, 0, ablation);
  load_into(bundle, ckpt);
  bundle.set_frozen(true);
  if (auto t = ckpt.metadata.find("trained"); t != ckpt.metadata.end()) {
    std::string_view rest = t->second;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      bundle.trained.insert(std::string(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? "" : rest.substr(comma + 1);
    }
  }
  audio::DspConfig dsp = bundle.vocoder->config();
  auto meta_int = [&](const char* key, auto& field) {
    if (auto m = ckpt.metadata.find(key); m != ckpt.metadata.end()) {
      field = static_cast<std::remove_reference_t<decltype(field)>>(std::stoll(m->second));
    }
  };
  auto meta_double = [&](const char* key, double& field) {
    if (auto m = ckpt.metadata.find(key); m != ckpt.metadata.end()) field = std::stod(m->second);
  };
  try {
    meta_int("dsp.sample_rate", dsp.sample_rate);
    meta_int("dsp.win_size", dsp.win_size);
    meta_int("dsp.hop_size", dsp.hop_size);
    meta_int("dsp.n_mels", dsp.n_mels);
    meta_double("dsp.f_min", dsp.f_min);
    meta_double("dsp.f_max", dsp.f_max);
    dsp.validate();
  } catch (const std::exception& e) {
    throw CheckpointError(Kind::kMalformed, path + ": bad DSP metadata: " + e.what());
  }
  if (dsp.n_mels != p.n_mels) {
    throw CheckpointError(Kind::kMalformed, path + ": DSP band count does not match the preset");
  }
  if (!(dsp == bundle.vocoder->config())) {
    bundle.vocoder = std::make_shared<models::GriffinLim>(dsp);
  }
  return bundle;
}

}  // namespace acvc::io
