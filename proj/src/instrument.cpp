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

#include "sgkit/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sgkit/errors.hpp"

namespace sgkit {

std::string_view to_string(Outcome outcome) { return outcome == Outcome::Up ? "up" : "down"; }

BlochState::BlochState(const Vector3& r) : r_(r) {
  if (!r.allFinite()) throw InvalidState("Bloch vector is not finite");
  if (r.norm() > 1.0 + kNormTolerance) {
    std::ostringstream msg;
    msg << "Bloch vector norm " << r.norm() << " exceeds 1";
    throw InvalidState(msg.str());
  }
}

PauliCoefficients BlochState::density() const { return {Complex{0.5, 0.0}, to_complex(0.5 * r_)}; }

PauliCoefficients Effect::as_pauli() const { return {Complex{weight, 0.0}, to_complex(weight * xi)}; }

bool Effect::is_physical(double tol) const {
  const auto [hi, lo] = hermitian_eigenvalues(as_pauli());
  return lo >= -tol && hi <= 1.0 + tol;
}

RotationSpec::RotationSpec(const Vector3& axis, double angle) : axis_(axis), angle_(angle) {
  if (!axis.allFinite() || !std::isfinite(angle)) {
    throw InvalidRotation("rotation axis and angle must be finite");
  }
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw InvalidRotation("rotation axis must be a unit vector");
}

RotationSpec RotationSpec::about(const Vector3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidRotation("rotation axis must be nonzero");
  return RotationSpec(axis / n, angle);
}

PauliCoefficients RotationSpec::unitary() const {
  const double half = 0.5 * angle_;
  return {Complex{std::cos(half), 0.0}, Complex{0.0, std::sin(half)} * to_complex(axis_)};
}

Vector3 Direction::unit() const {
  return {std::sin(theta) * std::cos(phi_az), std::sin(theta) * std::sin(phi_az), std::cos(theta)};
}

PauliCoefficients effect_operator(const KrausOperator& k) {
  const PauliCoefficients a = k.as_pauli();
  return pauli_mul(a, adjoint(a));
}

Effect effect_of(const KrausOperator& k) {
  const double w = k.weight();
  if (w < 1e-14) throw DegenerateKraus("effect_of: Kraus operator has vanishing weight");
  return {w, effect_operator(k).real_vector() / w};
}

double normalization_residual(const Instrument& inst) {
  const PauliCoefficients total = effect_operator(inst.up) + effect_operator(inst.down);
  double worst = std::abs(total.scalar.real() - 1.0);
  return std::max(worst, total.real_vector().cwiseAbs().maxCoeff());
}

double expectation(const KrausOperator& k, const Vector3& r) {
  const PauliCoefficients e = effect_operator(k);
  return e.scalar.real() + e.real_vector().dot(r);
}

double probability(const KrausOperator& k, const BlochState& state) {
  return std::clamp(expectation(k, state.vector()), 0.0, 1.0);
}

PauliCoefficients selective_conjugate(const KrausOperator& k, const PauliCoefficients& rho) {
  const PauliCoefficients a = k.as_pauli();
  return pauli_mul(pauli_mul(adjoint(a), rho), a);
}

namespace {

// Bloch vector of the normalized operator q / tr(q).
Vector3 bloch_of(const PauliCoefficients& q) { return q.real_vector() / q.scalar.real(); }

void require_normalized(const Instrument& inst, const char* who) {
  const double residual = normalization_residual(inst);
  if (residual > kNormalizedTolerance) {
    std::ostringstream msg;
    msg << who << ": instrument normalization residual " << residual << " exceeds "
        << kNormalizedTolerance;
    throw UnnormalizedInstrument(msg.str());
  }
}

}  // namespace

SelectiveOutcome selective_apply(const KrausOperator& k, const BlochState& state) {
  SelectiveOutcome out;
  out.probability = probability(k, state);
  if (expectation(k, state.vector()) < 1e-12) return out;
  out.post = BlochState(bloch_of(selective_conjugate(k, state.density())));
  return out;
}

PauliCoefficients nonselective_operator(const Instrument& inst, const PauliCoefficients& rho) {
  return selective_conjugate(inst.up, rho) + selective_conjugate(inst.down, rho);
}

BlochState nonselective_apply(const Instrument& inst, const BlochState& state) {
  require_normalized(inst, "nonselective_apply");
  return BlochState(bloch_of(nonselective_operator(inst, state.density())));
}

KrausOperator rotate_kraus(const KrausOperator& k, const RotationSpec& rot) {
  const ComplexTriple n = to_complex(rot.axis());
  const double phi = rot.angle();
  const double s = std::sin(0.5 * phi);
  const ComplexTriple b = std::cos(phi) * k.beta + std::sin(phi) * bilinear_cross(n, k.beta) +
                          (2.0 * s * s) * bilinear_dot(n, k.beta) * n;
  return {k.alpha, b};
}

Instrument rotate_instrument(const Instrument& inst, const RotationSpec& rot) {
  return {rotate_kraus(inst.up, rot), rotate_kraus(inst.down, rot)};
}

Vector3 cyclic_axis() { return Vector3::Ones() / std::sqrt(3.0); }

RotationSpec cyclic_rotation(int m) {
  return RotationSpec(cyclic_axis(), m * 2.0 * std::numbers::pi / 3.0);
}

std::array<Instrument, 3> cyclic_instruments(const Instrument& inst) {
  return {inst, rotate_instrument(inst, cyclic_rotation(1)),
          rotate_instrument(inst, cyclic_rotation(2))};
}

double successive_expectation(const Instrument& inst, const KrausOperator& second,
                              const Vector3& r) {
  const PauliCoefficients rho{Complex{0.5, 0.0}, to_complex(0.5 * r)};
  const PauliCoefficients after = nonselective_operator(inst, rho);
  return trace(pauli_mul(after, effect_operator(second))).real();
}

double successive_probability(const Instrument& inst, const KrausOperator& second,
                              const BlochState& state) {
  require_normalized(inst, "successive_probability");
  const BlochState mid = nonselective_apply(inst, state);
  return probability(second, mid);
}

Instrument ideal_instrument() {
  return {KrausOperator{Complex{0.5, 0.0}, ComplexTriple(0.0, 0.0, 0.5)},
          KrausOperator{Complex{0.5, 0.0}, ComplexTriple(0.0, 0.0, -0.5)}};
}

Instrument exact_normalize(const Instrument& inst) {
  const PauliCoefficients total = effect_operator(inst.up) + effect_operator(inst.down);
  const double centre = total.scalar.real();
  const Vector3 v = total.real_vector();
  const double radius = v.norm();
  const double hi = centre + radius;
  const double lo = centre - radius;
  if (lo < 1e-12) {
    std::ostringstream msg;
    msg << "exact_normalize: sum of effects has eigenvalue " << lo << " below 1e-12";
    throw SingularNormalization(msg.str());
  }
  const double ih = 1.0 / std::sqrt(hi);
  const double il = 1.0 / std::sqrt(lo);
  PauliCoefficients inv_sqrt{Complex{0.5 * (ih + il), 0.0}, ComplexTriple::Zero()};
  if (radius > 0.0) inv_sqrt.vector = to_complex((0.5 * (ih - il) / radius) * v);
  auto fix = [&](const KrausOperator& k) {
    const PauliCoefficients a = pauli_mul(inv_sqrt, k.as_pauli());
    return KrausOperator{a.scalar, a.vector};
  };
  return {fix(inst.up), fix(inst.down)};
}

}  // namespace sgkit
