// Copyright 2026 The sgkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "sgkit/commands.hpp"
#include "sgkit/experiment.hpp"
#include "sgkit/serialize.hpp"

namespace sgkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("sgkit-cmd-") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static fs::path bundled(const std::string& name) {
    return fs::path(SGKIT_SOURCE_DIR) / "configs" / name;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST_F(CommandTest, SimulateWritesOneRowPerSetting) {
  ASSERT_EQ(cmd_simulate(bundled("exact.json"), path("d.csv"), log_), kOk) << log_.str();
  std::ifstream in(path("d.csv"));
  const Dataset ds = read_dataset(in);
  EXPECT_EQ(ds.records.size(), 288u);
  EXPECT_EQ(ds.metadata.eta, 1e-3);
}

TEST_F(CommandTest, SimulateIsByteIdentical) {
  ASSERT_EQ(cmd_simulate(bundled("sampled.json"), path("a.csv"), log_), kOk);
  ASSERT_EQ(cmd_simulate(bundled("sampled.json"), path("b.csv"), log_), kOk);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CommandTest, ConfigErrorsExitTwoAndNameKey) {
  const auto cfg = write("bad.json", R"({"schema": "sgkit-config-v1", "shotz": 10})");
  EXPECT_EQ(cmd_simulate(cfg, path("d.csv"), log_), kInputError);
  EXPECT_NE(log_.str().find("shotz"), std::string::npos) << log_.str();
  const auto broken = write("broken.json", "{ not json");
  EXPECT_EQ(cmd_simulate(broken, path("d.csv"), log_), kInputError);
}

TEST_F(CommandTest, MissingFilesExitOne) {
  EXPECT_EQ(cmd_simulate(path("missing.json"), path("d.csv"), log_), kIoError);
  EXPECT_EQ(cmd_fit(path("missing.csv"), path("f.json"), log_), kIoError);
  EXPECT_EQ(cmd_recover(path("missing.json"), path("r.json"), {}, log_), kIoError);
  EXPECT_EQ(cmd_simulate(bundled("exact.json"), path("no/such/dir/d.csv"), log_), kIoError);
}

TEST_F(CommandTest, MalformedDatasetExitsTwo) {
  const auto data = write("bad.csv", "# version=sgkit-v1\nprotocol,m,outcome\n");
  EXPECT_EQ(cmd_fit(data, path("f.json"), log_), kInputError);
  EXPECT_NE(log_.str().find("line 2"), std::string::npos) << log_.str();
}

TEST_F(CommandTest, CoplanarProbesExitThree) {
  std::string text = "# version=sgkit-v1\n# eta=0.001\n" + std::string(kDatasetHeader) + "\n";
  for (int j = 0; j < 6; ++j) text += "single,0,up,1.5707963267948966," + std::to_string(j) + ",0,0,0.5\n";
  EXPECT_EQ(cmd_fit(write("flat.csv", text), path("f.json"), log_), kRankDeficient);
  EXPECT_NE(log_.str().find("single/up/m0"), std::string::npos) << log_.str();
}

TEST_F(CommandTest, FitThenRecoverExact) {
  ASSERT_EQ(cmd_simulate(bundled("exact.json"), path("d.csv"), log_), kOk);
  ASSERT_EQ(cmd_fit(path("d.csv"), path("f.json"), log_), kOk);
  ASSERT_EQ(cmd_recover(path("f.json"), path("r.json"), {}, log_), kOk) << log_.str();
  const json report = json::parse(slurp(path("r.json")));
  EXPECT_EQ(report["schema"], "sgkit-report-v1");
  EXPECT_EQ(report["recovery"]["rank"], 12);
  EXPECT_TRUE(report["compatible"].get<bool>());
  EXPECT_TRUE(fs::exists(path("r.txt")));
}

TEST_F(CommandTest, ResidualThresholdExitsFour) {
  ASSERT_EQ(cmd_simulate(bundled("exact.json"), path("d.csv"), log_), kOk);
  ASSERT_EQ(cmd_fit(path("d.csv"), path("f.json"), log_), kOk);
  RecoverOptions options;
  options.max_residual = 1e-9;
  EXPECT_EQ(cmd_recover(path("f.json"), path("r.json"), options, log_), kIncompatible);
  const json report = json::parse(slurp(path("r.json")));
  EXPECT_FALSE(report["consistency"]["consistent"].get<bool>());
  options.max_residual = 1.0;
  EXPECT_EQ(cmd_recover(path("f.json"), path("r.json"), options, log_), kOk);
}

TEST_F(CommandTest, NonAffineDataExitsFour) {
  // Sampled data plus a k_x k_y distortion that no affine response can absorb.
  std::ifstream cfg_in(bundled("sampled.json"));
  const RunConfig cfg = parse_run_config(json::parse(cfg_in));
  Dataset ds = simulate(cfg.experiment);
  for (auto& rec : ds.records) {
    const Vector3 k = rec.setting.direction.unit();
    const double shift = 0.01 * k.x() * k.y() * static_cast<double>(rec.shots);
    rec.successes = static_cast<std::uint64_t>(std::llround(static_cast<double>(rec.successes) + shift));
  }
  write_dataset(ds, path("d.csv"));
  ASSERT_EQ(cmd_fit(path("d.csv"), path("f.json"), log_), kOk);
  EXPECT_EQ(cmd_recover(path("f.json"), path("r.json"), {}, log_), kIncompatible);
  const json report = json::parse(slurp(path("r.json")));
  EXPECT_FALSE(report["goodness_of_fit"]["compatible"].get<bool>());
}

TEST_F(CommandTest, TranscribedConstraintsRun) {
  ASSERT_EQ(cmd_simulate(bundled("exact.json"), path("d.csv"), log_), kOk);
  ASSERT_EQ(cmd_fit(path("d.csv"), path("f.json"), log_), kOk);
  RecoverOptions options;
  options.constraints = ConstraintMode::PaperTranscribed;
  EXPECT_EQ(cmd_recover(path("f.json"), path("r.json"), options, log_), kOk) << log_.str();
  const json report = json::parse(slurp(path("r.json")));
  EXPECT_EQ(report["recovery"]["mode"], "paper");
}

TEST_F(CommandTest, VerifyPasses) {
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(out), kOk) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST_F(CommandTest, RoundTripBundledConfigs) {
  for (const char* name : {"exact.json", "sampled.json", "ideal.json"}) {
    EXPECT_EQ(cmd_roundtrip(bundled(name), path("rt.json"), log_), kOk) << name << "\n" << log_.str();
    const json report = json::parse(slurp(path("rt.json")));
    ASSERT_TRUE(report.contains("truth_check")) << name;
    const double err = report["truth_check"]["row_space_error"].get<double>();
    if (std::string(name) == "ideal.json") {
      EXPECT_LE(err, 1e-8);
    }
    if (std::string(name) == "sampled.json") {
      EXPECT_LE(report["truth_check"]["max_abs_z"].get<double>(), 4.0);
    }
  }
}

TEST_F(CommandTest, RoundTripIsDeterministic) {
  ASSERT_EQ(cmd_roundtrip(bundled("sampled.json"), path("a.json"), log_), kOk);
  ASSERT_EQ(cmd_roundtrip(bundled("sampled.json"), path("b.json"), log_), kOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
}

}  // namespace
}  // namespace sgkit::cli
