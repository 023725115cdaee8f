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

#include <gtest/gtest.h>

#include "matrix_oracle.hpp"
#include "sgkit/errors.hpp"
#include "sgkit/pauli.hpp"
#include "sgkit/random.hpp"

namespace sgkit {
namespace {

PauliCoefficients axis(int i, Complex s = 1.0) {
  PauliCoefficients p;
  p.scalar = 0.0;
  p.vector(i) = s;
  return p;
}

TEST(Pauli, SigmaProductsFollowLevicivita) {
  const Complex i1{0.0, 1.0};
  const auto xy = pauli_mul(axis(0), axis(1));
  EXPECT_LT(max_abs_difference(xy, axis(2, i1)), 1e-15);
  const auto yx = pauli_mul(axis(1), axis(0));
  EXPECT_LT(max_abs_difference(yx, axis(2, -i1)), 1e-15);
  const auto zz = pauli_mul(axis(2), axis(2));
  EXPECT_LT(max_abs_difference(zz, PauliCoefficients::identity()), 1e-15);
}

TEST(Pauli, ProductMatchesMatrixOracle) {
  RandomSource rng(11);
  for (int t = 0; t < 500; ++t) {
    const PauliCoefficients a{rng.complex(), rng.triple()}, b{rng.complex(), rng.triple()};
    const oracle::M2 expected = oracle::op(a.scalar, a.vector) * oracle::op(b.scalar, b.vector);
    Complex s;
    ComplexTriple v;
    oracle::components(expected, s, v);
    const auto got = pauli_mul(a, b);
    ASSERT_LT(std::abs(got.scalar - s), 1e-12);
    ASSERT_LT((got.vector - v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pauli, AdjointAndTraceMatchMatrixOracle) {
  RandomSource rng(12);
  for (int t = 0; t < 200; ++t) {
    const PauliCoefficients a{rng.complex(), rng.triple()};
    const oracle::M2 m = oracle::op(a.scalar, a.vector);
    EXPECT_LT(oracle::max_gap(to_matrix(adjoint(a)), m.adjoint()), 1e-14);
    EXPECT_LT(std::abs(trace(a) - m.trace()), 1e-14);
  }
}

TEST(Pauli, MatrixRoundTrip) {
  RandomSource rng(13);
  for (int t = 0; t < 100; ++t) {
    const PauliCoefficients a{rng.complex(), rng.triple()};
    EXPECT_LT(max_abs_difference(from_matrix(to_matrix(a)), a), 1e-14);
  }
}

TEST(Pauli, AlgebraLaws) {
  RandomSource rng(14);
  for (int t = 0; t < 200; ++t) {
    const PauliCoefficients a{rng.complex(), rng.triple()}, b{rng.complex(), rng.triple()},
        c{rng.complex(), rng.triple()};
    EXPECT_LT(max_abs_difference(pauli_mul(pauli_mul(a, b), c), pauli_mul(a, pauli_mul(b, c))), 1e-12);
    EXPECT_LT(max_abs_difference(adjoint(pauli_mul(a, b)), pauli_mul(adjoint(b), adjoint(a))), 1e-12);
    EXPECT_LT(max_abs_difference(pauli_mul(a, b + c), pauli_mul(a, b) + pauli_mul(a, c)), 1e-12);
    EXPECT_LT(max_abs_difference(pauli_mul(PauliCoefficients::identity(), a), a), 1e-15);
  }
}

TEST(Pauli, BilinearProductsDoNotConjugate) {
  const Complex i1{0.0, 1.0};
  const ComplexTriple a{i1, 0.0, 0.0}, b{0.0, i1, 0.0};
  EXPECT_EQ(bilinear_dot(a, a), Complex(-1.0, 0.0));
  const ComplexTriple c = bilinear_cross(a, b);
  EXPECT_EQ(c(2), Complex(-1.0, 0.0));
}

TEST(Pauli, HermitianEigenvalues) {
  const auto [hi, lo] = hermitian_eigenvalues(PauliCoefficients::identity() + axis(2));
  EXPECT_NEAR(hi, 2.0, 1e-15);
  EXPECT_NEAR(lo, 0.0, 1e-15);

  RandomSource rng(15);
  for (int t = 0; t < 100; ++t) {
    const PauliCoefficients h{Complex{rng.uniform(), 0.0}, to_complex(Vector3::Random())};
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(oracle::op(h.scalar, h.vector));
    const auto [big, small] = hermitian_eigenvalues(h);
    EXPECT_NEAR(big, es.eigenvalues()(1), 1e-12);
    EXPECT_NEAR(small, es.eigenvalues()(0), 1e-12);
  }
}

TEST(Pauli, HermitianEigenvaluesRejectNonHermitian) {
  EXPECT_THROW(hermitian_eigenvalues(axis(0, Complex{0.0, 1.0})), NonHermitianInput);
  EXPECT_THROW(hermitian_eigenvalues({Complex{1.0, 1e-6}, ComplexTriple::Zero()}), NonHermitianInput);
  EXPECT_TRUE(axis(1).is_hermitian());
  EXPECT_FALSE(axis(1, Complex{0.0, 1.0}).is_hermitian());
}

TEST(Pauli, FiniteCheck) {
  PauliCoefficients a = PauliCoefficients::identity();
  EXPECT_TRUE(a.is_finite());
  a.vector(1) = Complex{std::nan(""), 0.0};
  EXPECT_FALSE(a.is_finite());
}

}  // namespace
}  // namespace sgkit
