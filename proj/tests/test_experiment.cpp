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
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "matrix_oracle.hpp"
#include "sgkit/errors.hpp"
#include "sgkit/experiment.hpp"
#include "sgkit/random.hpp"

namespace sgkit {
namespace {

ExperimentConfig random_config(std::uint64_t seed, double eta) {
  RandomSource rng(seed);
  ExperimentConfig cfg;
  cfg.perturbation = PerturbationParams::from_vector(project_to_normalized(rng.parameters()), eta);
  cfg.seed = seed;
  return cfg;
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(ds, out);
  return out.str();
}

// Replaces line `n` (1-based) of `text`.
std::string with_line(const std::string& text, int n, const std::string& replacement) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  for (int i = 1; std::getline(in, line); ++i) out << (i == n ? replacement : line) << "\n";
  return out.str();
}

std::size_t error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_dataset(in);
  } catch (const FormatError& e) {
    return e.line();
  }
  return 0;
}

TEST(Grid, MidpointThetaUniformPhi) {
  const auto grid = make_grid(4, 8);
  ASSERT_EQ(grid.size(), 32u);
  EXPECT_NEAR(grid.front().theta, std::numbers::pi / 8.0, 1e-15);
  EXPECT_NEAR(grid.back().theta, 7.0 * std::numbers::pi / 8.0, 1e-15);
  EXPECT_NEAR(grid[1].phi_az, std::numbers::pi / 4.0, 1e-15);
  EXPECT_EQ(affine_design_rank(grid), 4);
}

TEST(Grid, RejectsDegenerateSizes) {
  EXPECT_THROW(make_grid(1, 8), InvalidGrid);
  EXPECT_THROW(make_grid(4, 2), InvalidGrid);
}

TEST(Grid, CoplanarDirectionsHaveLowAffineRank) {
  std::vector<Direction> equator;
  for (int j = 0; j < 6; ++j) equator.push_back({std::numbers::pi / 2.0, j * 1.0});
  EXPECT_EQ(affine_design_rank(equator), 3);
}

TEST(Plan, CardinalityAndOrder) {
  ExperimentConfig cfg;
  const auto plan = plan_settings(cfg);
  ASSERT_EQ(plan.size(), 32u * 9u);
  EXPECT_EQ(plan.front().observable.label(), "single/up/m0");
  EXPECT_EQ(plan[32].observable.label(), "single/down/m0");
  EXPECT_EQ(plan[6 * 32].observable.label(), "successive/up/m0");
  cfg.successive = false;
  EXPECT_EQ(plan_settings(cfg).size(), 32u * 6u);
  cfg.single = false;
  cfg.successive = true;
  cfg.grid = {3, 5};
  EXPECT_EQ(plan_settings(cfg).size(), 15u * 3u);
}

TEST(Simulation, ExactProbabilitiesMatchMatrixOracle) {
  const ExperimentConfig cfg = random_config(61, 0.05);
  const auto records = exact_dataset(cfg);
  const Instrument inst = build_perturbed(cfg.perturbation);
  const oracle::M2 up = oracle::op(inst.up.alpha, inst.up.beta);
  const oracle::M2 down = oracle::op(inst.down.alpha, inst.down.beta);
  for (const auto& rec : records) {
    ASSERT_TRUE(rec.exact());
    const auto& obs = rec.setting.observable;
    const oracle::M2 u = oracle::rotation_unitary(oracle::V3(1, 1, 1).normalized(), 2.0 * std::numbers::pi * obs.rotation / 3.0);
    const oracle::M2 branch = u.adjoint() * (obs.outcome == Outcome::Up ? up : down) * u;
    const Vector3 k = rec.setting.direction.unit();
    const double want = obs.protocol == Protocol::Single ? oracle::outcome_probability(branch, k)
                                                         : oracle::successive(up, down, branch, k);
    EXPECT_NEAR(*rec.probability, want, 1e-12) << obs.label();
  }
}

TEST(Simulation, IdealDeviceGivesIdealProbabilities) {
  ExperimentConfig cfg;
  for (const auto& rec : exact_dataset(cfg)) {
    if (rec.setting.observable.protocol != Protocol::Single || rec.setting.observable.rotation != 0) continue;
    const double kz = rec.setting.direction.unit().z();
    const double sign = rec.setting.observable.outcome == Outcome::Up ? 1.0 : -1.0;
    EXPECT_NEAR(*rec.probability, 0.5 * (1.0 + sign * kz), 1e-15);
  }
}

TEST(Simulation, StrictNormalizationIsApplied) {
  ExperimentConfig cfg = random_config(62, 0.1);
  EXPECT_GT(normalization_residual(model_instrument(cfg)), 1e-4);
  cfg.strict_normalization = true;
  EXPECT_LT(normalization_residual(model_instrument(cfg)), 1e-12);
  EXPECT_TRUE(metadata_of(cfg).strict_normalization);
}

TEST(Simulation, SamplingIsDeterministic) {
  ExperimentConfig cfg = random_config(63, 1e-2);
  cfg.shots = 1000;
  const auto a = sampled_dataset(cfg), b = sampled_dataset(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].successes, b[i].successes);
  cfg.seed += 1;
  const auto c = sampled_dataset(cfg);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i].successes != c[i].successes;
  EXPECT_GT(differ, a.size() / 2);
}

TEST(Simulation, PerSettingStreamsIgnorePlanPrefix) {
  ExperimentConfig full = random_config(64, 1e-2);
  full.shots = 500;
  ExperimentConfig single_only = full;
  single_only.successive = false;
  const auto a = sampled_dataset(full), b = sampled_dataset(single_only);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a[i].successes, b[i].successes);
  EXPECT_NE(setting_seed(1, 0), setting_seed(1, 1));
  EXPECT_NE(setting_seed(1, 0), setting_seed(2, 0));
}

TEST(Simulation, BinomialConcentration) {
  ExperimentConfig cfg = random_config(65, 1e-3);
  cfg.shots = 1000000;
  const auto exact = exact_dataset(cfg);
  const auto sampled = sampled_dataset(cfg);
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double p = *exact[i].probability;
    if (p < 1e-3 || p > 1.0 - 1e-3) continue;
    const double z = (sampled[i].frequency() - p) / std::sqrt(p * (1.0 - p) / 1e6);
    EXPECT_LT(std::abs(z), 5.0);
    sum += z;
    sum_sq += z * z;
    ++n;
  }
  ASSERT_GT(n, 100);
  EXPECT_LT(std::abs(sum / n), 4.0 / std::sqrt(n));
  EXPECT_GT(sum_sq / n, 0.7);
  EXPECT_LT(sum_sq / n, 1.3);
}

TEST(Simulation, SimulateSwitchesOnShots) {
  ExperimentConfig cfg = random_config(66, 1e-3);
  EXPECT_TRUE(simulate(cfg).records.front().exact());
  cfg.shots = 10;
  const Dataset ds = simulate(cfg);
  EXPECT_FALSE(ds.records.front().exact());
  EXPECT_EQ(ds.records.front().shots, 10u);
  EXPECT_EQ(ds.metadata.eta, 1e-3);
  EXPECT_THROW(sampled_dataset(ExperimentConfig{}), std::invalid_argument);
}

TEST(DatasetFormat, ExactRoundTripIsLossless) {
  const Dataset ds = simulate(random_config(67, 1e-3));
  const std::string text = to_csv(ds);
  std::istringstream in(text);
  const Dataset back = read_dataset(in);
  ASSERT_EQ(back.records.size(), ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    EXPECT_EQ(*back.records[i].probability, *ds.records[i].probability);
    EXPECT_EQ(back.records[i].setting.direction.theta, ds.records[i].setting.direction.theta);
    EXPECT_EQ(back.records[i].setting.observable, ds.records[i].setting.observable);
  }
  EXPECT_EQ(back.metadata.eta, ds.metadata.eta);
  EXPECT_EQ(back.metadata.seed, ds.metadata.seed);
  EXPECT_EQ(back.metadata.grid.n_phi, 8);
  EXPECT_EQ(to_csv(back), text);
}

TEST(DatasetFormat, SampledRoundTrip) {
  ExperimentConfig cfg = random_config(68, 1e-3);
  cfg.shots = 1000;
  cfg.strict_normalization = true;
  const Dataset ds = simulate(cfg);
  std::istringstream in(to_csv(ds));
  const Dataset back = read_dataset(in);
  EXPECT_TRUE(back.metadata.strict_normalization);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    EXPECT_EQ(back.records[i].successes, ds.records[i].successes);
    EXPECT_FALSE(back.records[i].probability.has_value());
  }
}

TEST(DatasetFormat, ErrorsCarryLineNumbers) {
  ExperimentConfig cfg = random_config(69, 1e-3);
  cfg.shots = 100;
  const std::string text = to_csv(simulate(cfg));
  // Lines 1-5 are metadata, line 6 the header, records start at line 7.
  EXPECT_EQ(error_line(with_line(text, 6, "protocol,m,outcome")), 6u);
  EXPECT_EQ(error_line(with_line(text, 9, "single,0,up,0.1,0.2,100")), 9u);
  EXPECT_EQ(error_line(with_line(text, 10, "single,3,up,0.1,0.2,100,5,")), 10u);
  EXPECT_EQ(error_line(with_line(text, 11, "single,0,sideways,0.1,0.2,100,5,")), 11u);
  EXPECT_EQ(error_line(with_line(text, 12, "single,0,up,0.1,0.2,100,101,")), 12u);
  EXPECT_EQ(error_line(with_line(text, 13, "single,0,up,abc,0.2,100,5,")), 13u);
  EXPECT_EQ(error_line(with_line(text, 14, "single,0,up,0.1,0.2,100,5,0.5")), 14u);
  EXPECT_EQ(error_line(with_line(text, 15, "single,0,up,0.1,0.2,0,0,")), 15u);
  EXPECT_EQ(error_line(with_line(text, 16, "single,0,up,0.1,0.2,0,0,1.5")), 16u);
  EXPECT_EQ(error_line(with_line(text, 1, "# version=sgkit-v0")), 1u);
  EXPECT_EQ(error_line(text), 0u);
}

TEST(DatasetFormat, SuccessOverflowNamesRow) {
  const std::string text = to_csv(simulate(random_config(70, 1e-3)));
  std::istringstream in(with_line(text, 9, "single,0,up,0.1,0.2,100,101,"));
  try {
    read_dataset(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(DatasetFormat, MissingHeaderAndVersion) {
  std::istringstream empty("");
  EXPECT_THROW(read_dataset(empty), FormatError);
  std::istringstream no_version(std::string(kDatasetHeader) + "\n");
  EXPECT_THROW(read_dataset(no_version), FormatError);
  EXPECT_THROW(read_dataset(std::filesystem::path("/nonexistent/dir/data.csv")), FormatError);
}

}  // namespace
}  // namespace sgkit
