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

// Inverse problem: affine fits of measured deviations from the ideal filter,
// then a rank-revealing least-squares solve for the 16 parameters.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgkit/errors.hpp"
#include "sgkit/experiment.hpp"
#include "sgkit/linearization.hpp"

namespace sgkit {

using ParameterMatrix = Eigen::Matrix<double, kParameterCount, kParameterCount>;

struct FitOptions {
  /// Deviations are divided by eta so coefficients are O(1); 0 means no scaling.
  double eta = 0.0;
  /// Multiplies every weight. Coefficients do not depend on it.
  double weight_scale = 1.0;
};

struct FitResult {
  ObservableSpec observable;
  AffineCoefficients coefficients;
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  /// Divisor applied to the raw deviations (eta, or 1 when eta == 0).
  double eta_scale = 1.0;
};

/// Weighted least squares of (frequency - ideal probability) on (1, kx, ky, kz).
/// Sampled records are weighted by shots / (p(1-p)) with p the clamped
/// empirical frequency; exact records get unit weight and a covariance
/// scaled by chi_square / dof.
/// Throws RankDeficientFit, or std::invalid_argument for fewer than 5
/// records or mixed observables.
FitResult fit_affine(std::span<const MeasurementRecord> records, const FitOptions& options = {});

/// Groups records by observable (in order of first appearance) and fits each.
std::vector<FitResult> fit_dataset(const Dataset& dataset);

struct RecoveryOptions {
  /// Singular values below this fraction of the largest are treated as zero.
  double singular_tolerance = 1e-10;
  /// Throw InconsistentSystem when residual_norm exceeds this.
  std::optional<double> max_residual;
};

struct RecoveryResult {
  ConstraintMode mode = ConstraintMode::Derived;
  /// Minimum-norm least-squares solution.
  ParameterVector parameters = ParameterVector::Zero();
  int rank = 0;
  std::vector<ParameterVector> nullspace_basis;
  double residual_norm = 0.0;
  /// Orthogonal projector onto the identifiable (row) space.
  ParameterMatrix row_space_projector = ParameterMatrix::Zero();
  /// Right singular vectors of the nonzero singular values, and the standard
  /// error of parameters . v propagated from the fit covariances.
  std::vector<ParameterVector> identifiable_combinations;
  std::vector<double> combination_standard_errors;
  ParameterMatrix parameter_covariance = ParameterMatrix::Zero();
  Eigen::VectorXd singular_values;
  Eigen::VectorXd rhs;
  std::vector<std::string> row_labels;
};

class InconsistentSystem : public Error {
 public:
  InconsistentSystem(RecoveryResult result, const std::string& what)
      : Error(what), result_(std::move(result)) {}
  const RecoveryResult& result() const noexcept { return result_; }

 private:
  RecoveryResult result_;
};

/// Stacks coefficient rows (rhs = scale * fitted c) and constraint rows
/// (rhs = 0) and solves through a full SVD (Jacobi). Throws
/// std::invalid_argument if the system references an observable without a
/// fit, InconsistentSystem when options.max_residual is exceeded.
RecoveryResult recover_parameters(std::span<const FitResult> fits, const LinearSystem& system,
                                  const RecoveryOptions& options = {});

struct FitQuality {
  std::string observable;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double reduced_chi_square = 0.0;
  bool compatible = true;
};

struct GoodnessOfFit {
  std::vector<FitQuality> fits;
  double total_chi_square = 0.0;
  int total_degrees_of_freedom = 0;
  double threshold = 3.0;
  bool compatible = true;
};

/// Compatible when every fit has chi_square / dof <= threshold.
GoodnessOfFit goodness_of_fit(std::span<const FitResult> fits, double threshold = 3.0);

}  // namespace sgkit
