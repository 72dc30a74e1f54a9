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


#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "acvc/audio/wav.hpp"
#include "acvc/io/manifest.hpp"
#include "cli.hpp"
#include "json.hpp"

namespace acvc::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("acvc_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"transmogrify"}).code, 2);
  auto r = call({"convert", "--in", "a.wav", "--out", "b.wav", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(call({"convert", "--in", "a.wav"}).code, 2);
  EXPECT_EQ(call({"eval-asr"}).code, 2);
}

TEST_F(CliTest, HelpExitsWithZero) {
  auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("inspect-ckpt"), std::string::npos);
  EXPECT_EQ(call({"stream", "--help"}).code, 0);
}

TEST_F(CliTest, RuntimeFailuresExitWithOne) {
  auto r = call({"convert", "--in", path("missing.wav"), "--out", path("o.wav")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(call({"--preset", "huge", "inspect-ckpt"}).code, 1);
}

TEST_F(CliTest, SynthDataThenConvert) {
  auto r = call({"--seed", "3", "synth-data", "--out", path("corpus"), "--speakers", "2",
                 "--accents", "2", "--utterances", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto records = io::read_manifest(path("corpus/manifest.jsonl"));
  ASSERT_EQ(records.size(), 4u);
  std::string in = path("corpus/" + records[0].audio_filepath);
  r = call({"convert", "--in", in, "--out", path("out.wav"), "--accent-from",
            path("corpus/" + records[1].audio_filepath), "--pitch", "scale:1.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto a = audio::load_wav(in);
  auto b = audio::load_wav(path("out.wav"));
  EXPECT_EQ(a.sample_rate, b.sample_rate);
  EXPECT_LE(b.size(), a.size());
  EXPECT_GT(b.size(), a.size() - 4 * 256);
}

TEST_F(CliTest, EvalAsrScoresLinePairs) {
  std::ofstream(path("ref.txt")) << "hello world\nGood Morning\n";
  std::ofstream(path("hyp.txt")) << "hello word\ngood morning\n";
  auto r = call({"--json", "eval-asr", "--ref", path("ref.txt"), "--hyp", path("hyp.txt"),
                 "--normalize"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0]["wer"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(rows[1]["wer"].get<double>(), 0.0);
  EXPECT_EQ(rows[2]["id"], "total");
  EXPECT_DOUBLE_EQ(rows[2]["wer"].get<double>(), 0.25);

  std::ofstream(path("short.txt")) << "one line\n";
  EXPECT_EQ(call({"eval-asr", "--ref", path("ref.txt"), "--hyp", path("short.txt")}).code, 1);
}

TEST_F(CliTest, JsonRecordsParse) {
  auto r = call({"--json", "inspect-ckpt"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("model"));
    EXPECT_FALSE(j.contains("reference_millions"));
    ++n;
  }
  EXPECT_EQ(n, 6u);
}

TEST_F(CliTest, TrainWritesCheckpointAndLog) {
  ASSERT_EQ(call({"synth-data", "--out", path("c"), "--utterances", "1"}).code, 0);
  auto r = call({"train", "--manifest", path("c/manifest.jsonl"), "--stage", "aege",
                 "--steps", "2", "--out", path("m.ckpt"), "--log", path("log.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream log(path("log.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["stage"], "aege");
    EXPECT_EQ(j["step"].get<std::size_t>(), n);
    ++n;
  }
  EXPECT_EQ(n, 2u);
  r = call({"--ckpt", path("m.ckpt"), "inspect-ckpt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("aege"), std::string::npos);
  // sts depends on stages this checkpoint has not completed.
  EXPECT_EQ(call({"--ckpt", path("m.ckpt"), "train", "--manifest", path("c/manifest.jsonl"),
                  "--stage", "sts", "--out", path("n.ckpt")})
                .code,
            1);
}

TEST_F(CliTest, ConfigFileSetsDefaults) {
  std::ofstream(path("bad.cfg")) << "dsp.hop_size 256\n";
  EXPECT_EQ(call({"--config", path("bad.cfg"), "inspect-ckpt"}).code, 1);
  std::ofstream(path("ok.cfg")) << "# sizes\npreset = toy\nseed = 4\n";
  EXPECT_EQ(call({"--config", path("ok.cfg"), "inspect-ckpt"}).code, 0);
}

}  // namespace
}  // namespace acvc::cli
