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
#include <vector>

#include <gtest/gtest.h>

#include "sgkit/errors.hpp"
#include "sgkit/estimation.hpp"
#include "sgkit/random.hpp"

namespace sgkit {
namespace {

const ObservableSpec kUp0{Protocol::Single, Outcome::Up, 0};

// Exact records whose deviation from the ideal filter is c0 + c.k.
std::vector<MeasurementRecord> affine_records(const ObservableSpec& obs, const Eigen::Vector4d& c) {
  std::vector<MeasurementRecord> out;
  const Instrument ideal = ideal_instrument();
  for (const auto& d : make_grid(4, 8)) {
    const Vector3 k = d.unit();
    const double p = observable_expectation(ideal, obs, k) + c(0) + c.tail<3>().dot(k);
    out.push_back({{obs, d}, 0, 0, p});
  }
  return out;
}

ExperimentConfig truth_config(std::uint64_t seed, double eta) {
  RandomSource rng(seed);
  ExperimentConfig cfg;
  cfg.perturbation = PerturbationParams::from_vector(project_to_normalized(rng.parameters()), eta);
  cfg.seed = seed;
  return cfg;
}

TEST(FitAffine, RecoversGeneratedCoefficients) {
  const Eigen::Vector4d c(0.01, -0.02, 0.005, 0.03);
  const auto records = affine_records(kUp0, c);
  const FitResult fit = fit_affine(records);
  EXPECT_LT((fit.coefficients.c - c).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(fit.chi_square, 1e-20);
  EXPECT_EQ(fit.degrees_of_freedom, 28);
  EXPECT_EQ(fit.eta_scale, 1.0);
}

TEST(FitAffine, EtaScaling) {
  const Eigen::Vector4d c(2e-3, -1e-3, 4e-3, 0.0);
  FitOptions options;
  options.eta = 1e-3;
  const FitResult fit = fit_affine(affine_records(kUp0, c), options);
  EXPECT_LT((fit.coefficients.c - c / 1e-3).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(fit.eta_scale, 1e-3);
}

TEST(FitAffine, IdealRecordsGiveZero) {
  const FitResult fit = fit_affine(affine_records(kUp0, Eigen::Vector4d::Zero()));
  EXPECT_LT(fit.coefficients.c.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FitAffine, WeightScaleDoesNotMoveCoefficients) {
  ExperimentConfig cfg = truth_config(71, 1e-2);
  cfg.shots = 10000;
  const auto records = sampled_dataset(cfg);
  const std::vector<MeasurementRecord> group(records.begin(), records.begin() + 32);
  FitOptions a, b;
  b.weight_scale = 7.0;
  const FitResult fa = fit_affine(group, a), fb = fit_affine(group, b);
  EXPECT_LT((fa.coefficients.c - fb.coefficients.c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitAffine, RejectsCoplanarProbes) {
  std::vector<MeasurementRecord> records;
  for (int j = 0; j < 8; ++j) records.push_back({{kUp0, {std::numbers::pi / 2.0, 0.7 * j}}, 0, 0, 0.5});
  EXPECT_THROW(fit_affine(records), RankDeficientFit);
}

TEST(FitAffine, RejectsTooFewOrMixedRecords) {
  auto records = affine_records(kUp0, Eigen::Vector4d::Zero());
  EXPECT_THROW(fit_affine(std::span(records).first(4)), std::invalid_argument);
  records[3].setting.observable.outcome = Outcome::Down;
  EXPECT_THROW(fit_affine(records), std::invalid_argument);
}

TEST(FitAffine, SampledChiSquarePerDegreeOfFreedom) {
  ExperimentConfig cfg = truth_config(72, 1e-3);
  cfg.shots = 1000000;
  const auto fits = fit_dataset(simulate(cfg));
  ASSERT_EQ(fits.size(), 9u);
  for (const auto& f : fits) {
    const double r = f.chi_square / f.degrees_of_freedom;
    EXPECT_GE(r, 0.5) << f.observable.label();
    EXPECT_LE(r, 2.0) << f.observable.label();
  }
  EXPECT_TRUE(goodness_of_fit(fits).compatible);
}

TEST(FitAffine, SampledCoefficientsWithinErrors) {
  ExperimentConfig cfg = truth_config(73, 1e-2);
  cfg.shots = 1000000;
  const auto fits = fit_dataset(simulate(cfg));
  for (const auto& f : fits) {
    const auto want = affine_coefficients(cfg.perturbation, f.observable).c;
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt(f.covariance(j, j));
      // second-order bias at eta = 1e-2 is ~eta in scaled units
      EXPECT_LT(std::abs(f.coefficients[j] - want(j)), 5.0 * se + 0.05) << f.observable.label();
    }
  }
}

TEST(FitDataset, GroupsInOrderOfAppearance) {
  Dataset ds;
  ds.metadata.eta = 0.5;
  const ObservableSpec succ{Protocol::Successive, Outcome::Up, 2};
  for (const auto& r : affine_records(succ, Eigen::Vector4d::Zero())) ds.records.push_back(r);
  for (const auto& r : affine_records(kUp0, Eigen::Vector4d::Zero())) ds.records.push_back(r);
  const auto fits = fit_dataset(ds);
  ASSERT_EQ(fits.size(), 2u);
  EXPECT_EQ(fits[0].observable, succ);
  EXPECT_EQ(fits[1].eta_scale, 0.5);
  ds.records.resize(32 + 3);
  EXPECT_THROW(fit_dataset(ds), RankDeficientFit);
}

TEST(Recovery, IdentityLikeSystem) {
  RandomSource rng(74);
  const ParameterVector p = rng.parameters();
  const auto obs = standard_observables();
  LinearSystem sys;
  sys.rows = Eigen::MatrixXd::Identity(kParameterCount, kParameterCount);
  std::vector<FitResult> fits(4);
  for (int r = 0; r < kParameterCount; ++r) {
    const ObservableSpec& o = obs[static_cast<std::size_t>(r / 4)];
    sys.sources.push_back({false, o, r % 4, 1.0});
    sys.row_labels.push_back(o.label());
    fits[static_cast<std::size_t>(r / 4)].observable = o;
    fits[static_cast<std::size_t>(r / 4)].coefficients.c(r % 4) = p(r);
  }
  const RecoveryResult res = recover_parameters(fits, sys);
  EXPECT_EQ(res.rank, 16);
  EXPECT_TRUE(res.nullspace_basis.empty());
  EXPECT_LT((res.parameters - p).norm(), 1e-13);
  EXPECT_LT(res.residual_norm, 1e-13);
}

TEST(Recovery, ExactFirstOrderDataIsRecoveredExactly) {
  RandomSource rng(75);
  const PerturbationParams truth = PerturbationParams::from_vector(project_to_normalized(rng.parameters()));
  const auto obs = standard_observables();
  std::vector<FitResult> fits;
  for (const auto& o : obs) {
    FitResult f;
    f.observable = o;
    f.coefficients = affine_coefficients(truth, o);
    fits.push_back(f);
  }
  const LinearSystem sys = design_matrix(obs);
  const RecoveryResult res = recover_parameters(fits, sys);
  EXPECT_EQ(res.rank, 12);
  EXPECT_EQ(res.rank + static_cast<int>(res.nullspace_basis.size()), 16);
  EXPECT_LT(res.residual_norm, 1e-10);
  EXPECT_LT((res.row_space_projector * (res.parameters - truth.to_vector())).norm(), 1e-10);
  // minimum norm: no nullspace component
  for (const auto& n : res.nullspace_basis) EXPECT_LT(std::abs(n.dot(res.parameters)), 1e-10);
}

TEST(Recovery, NullspaceIsOrthonormalAndContainsPhases) {
  const auto obs = standard_observables();
  std::vector<FitResult> fits;
  for (const auto& o : obs) fits.push_back({o, {}, Eigen::Matrix4d::Identity(), 0.0, 28, 1.0});
  const RecoveryResult res = recover_parameters(fits, design_matrix(obs));
  const auto n = res.nullspace_basis.size();
  ASSERT_EQ(n, 4u);
  Eigen::MatrixXd basis(kParameterCount, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) basis.col(static_cast<Eigen::Index>(i)) = res.nullspace_basis[i];
  EXPECT_LT((basis.transpose() * basis - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  ParameterVector phase = ParameterVector::Zero();
  phase(parameter_index("a_i_down")) = 0.5;
  phase(parameter_index("b_iz_down")) = -0.5;
  EXPECT_LT((res.row_space_projector * phase).norm(), 1e-10);
  EXPECT_LT((basis * basis.transpose() * phase - phase).norm(), 1e-10);
  const ParameterMatrix proj = res.row_space_projector;
  EXPECT_LT((proj * proj - proj).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Recovery, InconsistentSystemCarriesResult) {
  const auto obs = standard_observables();
  std::vector<FitResult> fits;
  for (const auto& o : obs) {
    FitResult f;
    f.observable = o;
    f.coefficients.c = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    fits.push_back(f);
  }
  RecoveryOptions options;
  options.max_residual = 1e-6;
  try {
    recover_parameters(fits, design_matrix(obs), options);
    FAIL() << "expected InconsistentSystem";
  } catch (const InconsistentSystem& e) {
    EXPECT_GT(e.result().residual_norm, 1e-6);
    EXPECT_EQ(e.result().rank, 12);
  }
}

TEST(Recovery, MissingFitIsReported) {
  const auto obs = standard_observables();
  std::vector<FitResult> fits(1);
  fits[0].observable = obs[0];
  EXPECT_THROW(recover_parameters(fits, design_matrix(obs)), std::invalid_argument);
}

TEST(Recovery, TranscribedModeSolves) {
  const auto obs = standard_observables();
  std::vector<FitResult> fits;
  for (const auto& o : obs) fits.push_back({o, {}, Eigen::Matrix4d::Identity(), 0.0, 28, 1.0});
  const RecoveryResult res = recover_parameters(fits, build_system(obs, ConstraintMode::PaperTranscribed));
  EXPECT_EQ(res.mode, ConstraintMode::PaperTranscribed);
  EXPECT_EQ(res.rank + static_cast<int>(res.nullspace_basis.size()), 16);
  EXPECT_LT(res.parameters.norm(), 1e-14);
}

TEST(Recovery, StandardErrorsFollowCovariance) {
  const auto obs = standard_observables();
  std::vector<FitResult> small, large;
  for (const auto& o : obs) {
    small.push_back({o, {}, 1e-4 * Eigen::Matrix4d::Identity(), 0.0, 28, 1.0});
    large.push_back({o, {}, 4e-4 * Eigen::Matrix4d::Identity(), 0.0, 28, 1.0});
  }
  const auto a = recover_parameters(small, design_matrix(obs));
  const auto b = recover_parameters(large, design_matrix(obs));
  for (std::size_t k = 0; k < a.combination_standard_errors.size(); ++k) {
    EXPECT_NEAR(b.combination_standard_errors[k], 2.0 * a.combination_standard_errors[k], 1e-12);
    const auto& v = a.identifiable_combinations[k];
    EXPECT_NEAR(std::sqrt(v.dot(a.parameter_covariance * v)), a.combination_standard_errors[k], 1e-10);
  }
}

TEST(Goodness, ThresholdAndTotals) {
  std::vector<FitResult> fits(2);
  fits[0].chi_square = 28.0;
  fits[0].degrees_of_freedom = 28;
  fits[1].chi_square = 100.0;
  fits[1].degrees_of_freedom = 28;
  const GoodnessOfFit g = goodness_of_fit(fits);
  EXPECT_FALSE(g.compatible);
  EXPECT_TRUE(g.fits[0].compatible);
  EXPECT_DOUBLE_EQ(g.total_chi_square, 128.0);
  EXPECT_EQ(g.total_degrees_of_freedom, 56);
  EXPECT_TRUE(goodness_of_fit(fits, 4.0).compatible);
}

}  // namespace
}  // namespace sgkit
