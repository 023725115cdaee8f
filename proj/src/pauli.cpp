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

#include "sgkit/pauli.hpp"

#include <algorithm>
#include <cmath>

#include "sgkit/errors.hpp"

namespace sgkit {

namespace {

const Matrix2c& sigma(int axis) {
  static const Matrix2c kSigma[3] = {
      (Matrix2c() << 0, 1, 1, 0).finished(),
      (Matrix2c() << 0, Complex(0, -1), Complex(0, 1), 0).finished(),
      (Matrix2c() << 1, 0, 0, -1).finished(),
  };
  return kSigma[axis];
}

}  // namespace

bool PauliCoefficients::is_finite() const {
  auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  return finite(scalar) && finite(vector(0)) && finite(vector(1)) && finite(vector(2));
}

bool PauliCoefficients::is_hermitian(double tol) const {
  return std::abs(scalar.imag()) <= tol && vector.imag().cwiseAbs().maxCoeff() <= tol;
}

PauliCoefficients operator+(const PauliCoefficients& a, const PauliCoefficients& b) {
  return {a.scalar + b.scalar, a.vector + b.vector};
}

PauliCoefficients operator-(const PauliCoefficients& a, const PauliCoefficients& b) {
  return {a.scalar - b.scalar, a.vector - b.vector};
}

PauliCoefficients operator*(Complex s, const PauliCoefficients& a) {
  return {s * a.scalar, s * a.vector};
}

PauliCoefficients pauli_mul(const PauliCoefficients& a, const PauliCoefficients& b) {
  constexpr Complex kI{0.0, 1.0};
  return {a.scalar * b.scalar + bilinear_dot(a.vector, b.vector),
          a.scalar * b.vector + b.scalar * a.vector + kI * bilinear_cross(a.vector, b.vector)};
}

PauliCoefficients adjoint(const PauliCoefficients& a) {
  return {std::conj(a.scalar), a.vector.conjugate()};
}

Complex trace(const PauliCoefficients& a) { return 2.0 * a.scalar; }

Matrix2c to_matrix(const PauliCoefficients& a) {
  Matrix2c m = a.scalar * Matrix2c::Identity();
  for (int i = 0; i < 3; ++i) m += a.vector(i) * sigma(i);
  return m;
}

PauliCoefficients from_matrix(const Matrix2c& m) {
  PauliCoefficients out;
  out.scalar = 0.5 * m.trace();
  for (int i = 0; i < 3; ++i) out.vector(i) = 0.5 * (sigma(i) * m).trace();
  return out;
}

std::pair<double, double> hermitian_eigenvalues(const PauliCoefficients& a) {
  if (!a.is_hermitian(1e-12)) {
    throw NonHermitianInput("hermitian_eigenvalues: operator is not Hermitian");
  }
  const double radius = a.real_vector().norm();
  const double centre = a.scalar.real();
  return {centre + radius, centre - radius};
}

double max_abs_difference(const PauliCoefficients& a, const PauliCoefficients& b) {
  const Complex ds = a.scalar - b.scalar;
  double worst = std::max(std::abs(ds.real()), std::abs(ds.imag()));
  const ComplexTriple dv = a.vector - b.vector;
  worst = std::max(worst, dv.real().cwiseAbs().maxCoeff());
  worst = std::max(worst, dv.imag().cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace sgkit
