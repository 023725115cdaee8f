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

// Arithmetic on 2x2 operators stored as coefficients in the basis
// {1, sigma_x, sigma_y, sigma_z}.

#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace sgkit {

using Complex = std::complex<double>;
using ComplexTriple = Eigen::Vector3cd;
using Vector3 = Eigen::Vector3d;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kDefaultTolerance = 1e-12;

/// Bilinear dot product: no conjugation on either argument.
inline Complex bilinear_dot(const ComplexTriple& a, const ComplexTriple& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

/// Bilinear cross product. Eigen's cross() conjugates complex operands, so
/// it is spelled out here.
inline ComplexTriple bilinear_cross(const ComplexTriple& a, const ComplexTriple& b) {
  return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

inline ComplexTriple to_complex(const Vector3& v) { return v.cast<Complex>(); }

/// scalar * 1 + vector . sigma
struct PauliCoefficients {
  Complex scalar{0.0, 0.0};
  ComplexTriple vector = ComplexTriple::Zero();

  static PauliCoefficients identity() { return {Complex{1.0, 0.0}, ComplexTriple::Zero()}; }

  bool is_finite() const;
  bool is_hermitian(double tol = kDefaultTolerance) const;
  Vector3 real_vector() const { return vector.real(); }
};

PauliCoefficients operator+(const PauliCoefficients& a, const PauliCoefficients& b);
PauliCoefficients operator-(const PauliCoefficients& a, const PauliCoefficients& b);
PauliCoefficients operator*(Complex s, const PauliCoefficients& a);

/// Operator product, (a0 + a.s)(b0 + b.s) = a0 b0 + a.b + (a0 b + b0 a + i a x b).s
PauliCoefficients pauli_mul(const PauliCoefficients& a, const PauliCoefficients& b);

PauliCoefficients adjoint(const PauliCoefficients& a);

/// Trace of the 2x2 operator, i.e. twice the identity coefficient.
Complex trace(const PauliCoefficients& a);

/// Explicit matrix form. Only used to cross-check the coefficient algebra.
Matrix2c to_matrix(const PauliCoefficients& a);
PauliCoefficients from_matrix(const Matrix2c& m);

/// Spectrum (larger, smaller) of a Hermitian operator.
/// Throws NonHermitianInput when the Hermitian test fails at 1e-12.
std::pair<double, double> hermitian_eigenvalues(const PauliCoefficients& a);

/// Largest absolute difference over all eight real components.
double max_abs_difference(const PauliCoefficients& a, const PauliCoefficients& b);

}  // namespace sgkit
