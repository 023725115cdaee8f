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

// First-order model of a slightly non-ideal filter:
//   alpha = 1/2 + eta a,   beta = +-e_z/2 + eta b
// with 16 real parameters (a, b per outcome). Responses are extracted
// exactly by polynomial interpolation in eta.

#pragma once

#include <array>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgkit/instrument.hpp"

namespace sgkit {

inline constexpr int kParameterCount = 16;
using ParameterVector = Eigen::Matrix<double, kParameterCount, 1>;

/// Column order: a_r, a_i, b_rx, b_ry, b_rz, b_ix, b_iy, b_iz for up, then down.
const std::array<std::string, kParameterCount>& parameter_names();
/// Index into parameter_names(); throws std::out_of_range for unknown names.
int parameter_index(std::string_view name);

struct PerturbationParams {
  Complex a_up{0.0, 0.0};
  Complex a_down{0.0, 0.0};
  ComplexTriple b_up = ComplexTriple::Zero();
  ComplexTriple b_down = ComplexTriple::Zero();
  double eta = 0.0;

  ParameterVector to_vector() const;
  static PerturbationParams from_vector(const ParameterVector& v, double eta = 0.0);
};

enum class Protocol { Single, Successive };

std::string_view to_string(Protocol protocol);

/// For Single, `rotation` selects the rotated device. For Successive the
/// first stage is the base non-selective instrument and `rotation` selects
/// the rotated selective second stage.
struct ObservableSpec {
  Protocol protocol = Protocol::Single;
  Outcome outcome = Outcome::Up;
  int rotation = 0;

  /// e.g. "single/up/m0"
  std::string label() const;
  auto operator<=>(const ObservableSpec&) const = default;
};

/// The nine observables of the standard plan, in plan order.
std::vector<ObservableSpec> standard_observables();

/// Coefficients of c0 + c1 kx + c2 ky + c3 kz.
struct AffineCoefficients {
  Eigen::Vector4d c = Eigen::Vector4d::Zero();

  double operator[](int i) const { return c(i); }
  double evaluate(const Vector3& k) const { return c(0) + c.tail<3>().dot(k); }
};

/// No normalization repair; the residual is O(eta).
Instrument build_perturbed(const PerturbationParams& p);

/// Unclamped probability of `obs` for probe Bloch vector `k`.
double observable_expectation(const Instrument& inst, const ObservableSpec& obs, const Vector3& k);

/// Polynomial degree of the probability in eta.
int eta_degree(Protocol protocol);

/// Linear coefficient at 0 of the polynomial interpolating (nodes, values).
double interpolated_linear_coefficient(std::span<const double> nodes,
                                       std::span<const double> values);

/// Exact eta^1 coefficient of the probability. `p.eta` is ignored.
double linear_response(const PerturbationParams& p, const ObservableSpec& obs, const Direction& k);
double linear_response(const PerturbationParams& p, const ObservableSpec& obs, const Vector3& k,
                       std::span<const double> nodes);

/// max over `directions` of |f(eta) - f(0) - eta * linear response|, at p.eta.
double first_order_remainder(const PerturbationParams& p, const ObservableSpec& obs,
                             std::span<const Vector3> directions);

/// Throws NonAffineResponse if the response is not affine in k to 1e-12.
AffineCoefficients affine_coefficients(const PerturbationParams& p, const ObservableSpec& obs);

enum class ConstraintMode { Derived, PaperTranscribed };

std::string_view to_string(ConstraintMode mode);
ConstraintMode constraint_mode_from_string(std::string_view text);

/// Where a row's right-hand side comes from: scale * c_j of a fitted
/// observable, or zero for a constraint.
struct RowSource {
  bool constraint = false;
  ObservableSpec observable;
  int coefficient = 0;
  double scale = 1.0;
};

struct LinearSystem {
  ConstraintMode mode = ConstraintMode::Derived;
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
  std::vector<std::string> row_labels;
  std::vector<RowSource> sources;

  Eigen::Index row_count() const { return rows.rows(); }
  const std::array<std::string, kParameterCount>& column_labels() const { return parameter_names(); }
};

/// Rows d c_j / d p_i for every observable, followed by the first-order
/// normalization rows (constant and k-linear parts of the up+down single
/// responses) for rotation 0 and every rotation used by a Single observable.
LinearSystem design_matrix(std::span<const ObservableSpec> observables);

/// The thirteen equations listed in the source derivation, transcribed.
LinearSystem paper_system();

/// The four first-order normalization rows of the base device (rows
/// "norm/m0:c0..c3" of design_matrix).
Eigen::Matrix<double, 4, kParameterCount> normalization_rows();

/// Orthogonal projection of `v` onto the parameters that satisfy the
/// first-order normalization rows.
ParameterVector project_to_normalized(const ParameterVector& v);

LinearSystem build_system(std::span<const ObservableSpec> observables, ConstraintMode mode);

/// weight = weight0 + eta weight1, weight * xi = vector0 + eta vector1
struct EffectExpansion {
  double weight0 = 0.0;
  double weight1 = 0.0;
  Vector3 vector0 = Vector3::Zero();
  Vector3 vector1 = Vector3::Zero();

  Effect at(double eta) const;
};

std::pair<EffectExpansion, EffectExpansion> first_order_expansion(const PerturbationParams& p);
/// Effects of build_perturbed(p) truncated at first order in p.eta.
std::pair<Effect, Effect> first_order_effects(const PerturbationParams& p);

enum class Verdict { Confirmed, SignDiscrepancy, StructureDiscrepancy };

std::string_view to_string(Verdict verdict);

struct ComparisonEntry {
  std::string group;
  std::string equation;
  ParameterVector paper_row = ParameterVector::Zero();
  std::string paper_rhs;
  std::string generated_label;
  ParameterVector generated_row = ParameterVector::Zero();
  Verdict verdict = Verdict::Confirmed;
  /// Generated rows (other than the counterpart) equal to the transcribed row.
  std::vector<std::string> also_matches;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;

  std::string to_text() const;
};

/// Human-readable linear form, e.g. "a_r_up + b_rz_up - 2 b_iy_down".
std::string format_row(const ParameterVector& row);

ComparisonReport compare_with_paper();

}  // namespace sgkit
