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

// Two-outcome spin-1/2 instrument. Each outcome branch is a Kraus operator
// A = alpha + beta.sigma acting as rho -> A^dag rho A, so the effect whose
// expectation gives the outcome probability is A A^dag.

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "sgkit/pauli.hpp"

namespace sgkit {

enum class Outcome { Up, Down };

std::string_view to_string(Outcome outcome);

struct KrausOperator {
  Complex alpha{0.0, 0.0};
  ComplexTriple beta = ComplexTriple::Zero();

  PauliCoefficients as_pauli() const { return {alpha, beta}; }
  /// |alpha|^2 + |beta|^2
  double weight() const { return std::norm(alpha) + beta.squaredNorm(); }
  bool within_weight_bound(double tol = 1e-9) const { return weight() <= 1.0 + tol; }
};

struct Instrument {
  KrausOperator up;
  KrausOperator down;

  const KrausOperator& branch(Outcome outcome) const {
    return outcome == Outcome::Up ? up : down;
  }
};

/// Spin-1/2 state rho = (1 + r.sigma) / 2 with |r| <= 1.
class BlochState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  BlochState() = default;
  /// Throws InvalidState when |r| > 1 + 1e-12 or r is not finite.
  explicit BlochState(const Vector3& r);

  const Vector3& vector() const { return r_; }
  PauliCoefficients density() const;

 private:
  Vector3 r_ = Vector3::Zero();
};

/// F = weight * (1 + xi.sigma)
struct Effect {
  double weight = 0.0;
  Vector3 xi = Vector3::Zero();

  PauliCoefficients as_pauli() const;
  /// Both eigenvalues of the reconstructed operator lie in [-tol, 1 + tol].
  bool is_physical(double tol = 1e-9) const;
};

class RotationSpec {
 public:
  /// Throws InvalidRotation unless | |axis| - 1 | <= 1e-12.
  RotationSpec(const Vector3& axis, double angle);
  /// Normalizes `axis` first; throws InvalidRotation for a zero axis.
  static RotationSpec about(const Vector3& axis, double angle);

  const Vector3& axis() const { return axis_; }
  double angle() const { return angle_; }

  /// U = cos(angle/2) + i sin(angle/2) n.sigma
  PauliCoefficients unitary() const;

 private:
  Vector3 axis_;
  double angle_;
};

/// Probe direction in spherical angles.
struct Direction {
  double theta = 0.0;
  double phi_az = 0.0;

  Vector3 unit() const;
};

struct SelectiveOutcome {
  double probability = 0.0;
  /// Empty when the branch absorbs the state (probability < 1e-12).
  std::optional<BlochState> post;
};

inline constexpr double kNormalizedTolerance = 1e-9;

/// The Pauli coefficients of A A^dag.
PauliCoefficients effect_operator(const KrausOperator& k);

/// Throws DegenerateKraus when the weight is below 1e-14.
Effect effect_of(const KrausOperator& k);

/// Max deviation over the four real equations of sum_m A_m A_m^dag = 1.
double normalization_residual(const Instrument& inst);

/// tr(rho A A^dag) with no clamping; exact polynomial in the Kraus entries.
double expectation(const KrausOperator& k, const Vector3& r);

/// Outcome probability, clamped to [0, 1].
double probability(const KrausOperator& k, const BlochState& state);

/// A^dag rho A, unnormalized.
PauliCoefficients selective_conjugate(const KrausOperator& k, const PauliCoefficients& rho);

SelectiveOutcome selective_apply(const KrausOperator& k, const BlochState& state);

/// sum_m A_m^dag rho A_m without any normalization check. For an
/// unnormalized instrument the trace of the result differs from 1.
PauliCoefficients nonselective_operator(const Instrument& inst, const PauliCoefficients& rho);

/// Throws UnnormalizedInstrument when the residual exceeds 1e-9.
BlochState nonselective_apply(const Instrument& inst, const BlochState& state);

KrausOperator rotate_kraus(const KrausOperator& k, const RotationSpec& rot);
Instrument rotate_instrument(const Instrument& inst, const RotationSpec& rot);

/// Axis (1,1,1)/sqrt(3) of the cyclic axis permutation.
Vector3 cyclic_axis();
/// Rotation by m * 2pi/3 about cyclic_axis(); maps z -> x -> y for m = 1.
RotationSpec cyclic_rotation(int m);
std::array<Instrument, 3> cyclic_instruments(const Instrument& inst);

/// tr(second^dag rho' second) with rho' the unnormalized non-selective
/// image of `r`. No normalization check and no clamping.
double successive_expectation(const Instrument& inst, const KrausOperator& second,
                              const Vector3& r);

/// Non-selective pass through `inst` followed by a selective `second`.
/// Throws UnnormalizedInstrument.
double successive_probability(const Instrument& inst, const KrausOperator& second,
                              const BlochState& state);

/// Projective sigma_z filter: alpha = 1/2, beta = +-e_z/2.
Instrument ideal_instrument();

/// Left-multiplies both branches by S^(-1/2), S = sum_m A_m A_m^dag.
/// Throws SingularNormalization if an eigenvalue of S is below 1e-12.
Instrument exact_normalize(const Instrument& inst);

}  // namespace sgkit
