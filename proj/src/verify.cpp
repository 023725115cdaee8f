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

#include "sgkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "sgkit/instrument.hpp"
#include "sgkit/linearization.hpp"
#include "sgkit/random.hpp"

namespace sgkit {

namespace {

Matrix2c density_matrix(const Vector3& r) { return to_matrix({Complex{0.5, 0.0}, to_complex(0.5 * r)}); }

Vector3 bloch_from_matrix(const Matrix2c& rho) {
  const PauliCoefficients c = from_matrix(rho / rho.trace());
  return 2.0 * c.real_vector();
}

double matrix_gap(const Matrix2c& a, const Matrix2c& b) { return (a - b).cwiseAbs().maxCoeff(); }

CheckResult check(std::string name, double tolerance, const std::function<double()>& body) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  try {
    r.worst = body();
    r.passed = std::isfinite(r.worst) && r.worst <= tolerance;
  } catch (const std::exception& e) {
    r.worst = std::numeric_limits<double>::infinity();
    r.detail = e.what();
  }
  return r;
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  std::vector<CheckResult> out;
  constexpr int kTrials = 300;

  out.push_back(check("pauli_mul matches matrix product", 1e-12, [&] {
    RandomSource rng(seed);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const PauliCoefficients a{rng.complex(), rng.triple()}, b{rng.complex(), rng.triple()};
      worst = std::max(worst, matrix_gap(to_matrix(pauli_mul(a, b)), to_matrix(a) * to_matrix(b)));
    }
    return worst;
  }));

  out.push_back(check("pauli_mul associative, adjoint reverses products", 1e-12, [&] {
    RandomSource rng(seed + 1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const PauliCoefficients a{rng.complex(), rng.triple()}, b{rng.complex(), rng.triple()},
          c{rng.complex(), rng.triple()};
      worst = std::max(worst, max_abs_difference(pauli_mul(pauli_mul(a, b), c), pauli_mul(a, pauli_mul(b, c))));
      worst = std::max(worst, max_abs_difference(adjoint(pauli_mul(a, b)), pauli_mul(adjoint(b), adjoint(a))));
    }
    return worst;
  }));

  out.push_back(check("probability matches tr(rho A A^dag)", 1e-12, [&] {
    RandomSource rng(seed + 2);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Instrument inst = rng.instrument();
      const BlochState s = rng.state();
      for (const auto* k : {&inst.up, &inst.down}) {
        const Matrix2c a = to_matrix(k->as_pauli());
        const double direct = (density_matrix(s.vector()) * a * a.adjoint()).trace().real();
        worst = std::max(worst, std::abs(probability(*k, s) - direct));
      }
    }
    return worst;
  }));

  out.push_back(check("selective and non-selective states match matrix conjugation", 1e-12, [&] {
    RandomSource rng(seed + 3);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Instrument inst = rng.instrument();
      const BlochState s = rng.state();
      const Matrix2c rho = density_matrix(s.vector());
      const Matrix2c au = to_matrix(inst.up.as_pauli()), ad = to_matrix(inst.down.as_pauli());
      const SelectiveOutcome sel = selective_apply(inst.up, s);
      if (sel.post) {
        worst = std::max(worst, (sel.post->vector() - bloch_from_matrix(au.adjoint() * rho * au)).cwiseAbs().maxCoeff());
      }
      const Matrix2c mixed = au.adjoint() * rho * au + ad.adjoint() * rho * ad;
      worst = std::max(worst, (nonselective_apply(inst, s).vector() - bloch_from_matrix(mixed)).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  out.push_back(check("probability completeness f_up + f_down = 1", 1e-12, [&] {
    RandomSource rng(seed + 4);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Instrument inst = rng.instrument();
      const BlochState s = rng.state();
      worst = std::max(worst, std::abs(probability(inst.up, s) + probability(inst.down, s) - 1.0));
    }
    return worst;
  }));

  out.push_back(check("exact_normalize drives residual to zero", 1e-12, [&] {
    RandomSource rng(seed + 5);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      worst = std::max(worst, normalization_residual(exact_normalize({rng.kraus(), rng.kraus()})));
    }
    return worst;
  }));

  out.push_back(check("cyclic rotations permute axes (z -> x -> y)", 1e-12, [&] {
    RandomSource rng(seed + 6);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const KrausOperator k = rng.kraus();
      const ComplexTriple& b = k.beta;
      const ComplexTriple b1 = rotate_kraus(k, cyclic_rotation(1)).beta;
      const ComplexTriple b2 = rotate_kraus(k, cyclic_rotation(2)).beta;
      worst = std::max(worst, (b1 - ComplexTriple(b(2), b(0), b(1))).cwiseAbs().maxCoeff());
      worst = std::max(worst, (b2 - ComplexTriple(b(1), b(2), b(0))).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  out.push_back(check("closed-form rotation equals U^dag A U", 1e-12, [&] {
    RandomSource rng(seed + 7);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const KrausOperator k = rng.kraus();
      const RotationSpec rot = rng.rotation();
      const PauliCoefficients u = rot.unitary();
      const PauliCoefficients conj = pauli_mul(pauli_mul(adjoint(u), k.as_pauli()), u);
      worst = std::max(worst, max_abs_difference(rotate_kraus(k, rot).as_pauli(), conj));
    }
    return worst;
  }));

  out.push_back(check("rotation covariance of probabilities", 1e-12, [&] {
    RandomSource rng(seed + 8);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Instrument inst = rng.instrument();
      const BlochState s = rng.state();
      const RotationSpec rot = rng.rotation();
      const Matrix2c u = to_matrix(rot.unitary());
      const BlochState moved(bloch_from_matrix(u * density_matrix(s.vector()) * u.adjoint()));
      worst = std::max(worst, std::abs(probability(rotate_kraus(inst.up, rot), s) - probability(inst.up, moved)));
    }
    return worst;
  }));

  out.push_back(check("per-branch phase changes no observable", 1e-12, [&] {
    RandomSource rng(seed + 9);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Instrument inst = rng.instrument();
      const BlochState s = rng.state();
      const Complex phase = std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
      const Instrument turned{{phase * inst.up.alpha, phase * inst.up.beta}, inst.down};
      worst = std::max(worst, std::abs(probability(inst.up, s) - probability(turned.up, s)));
      worst = std::max(worst, (nonselective_apply(inst, s).vector() - nonselective_apply(turned, s).vector()).cwiseAbs().maxCoeff());
      const auto a = selective_apply(inst.up, s), b = selective_apply(turned.up, s);
      if (a.post && b.post) worst = std::max(worst, (a.post->vector() - b.post->vector()).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  out.push_back(check("phase directions lie in the design-matrix nullspace", 1e-10, [&] {
    const auto obs = standard_observables();
    const LinearSystem sys = design_matrix(obs);
    const double top = Eigen::JacobiSVD<Eigen::MatrixXd>(sys.rows).singularValues()(0);
    double worst = 0.0;
    for (int branch = 0; branch < 2; ++branch) {
      ParameterVector v = ParameterVector::Zero();
      v(branch * 8 + 1) = 0.5;                          // a_i
      v(branch * 8 + 7) = branch == 0 ? 0.5 : -0.5;     // b_iz
      worst = std::max(worst, (sys.rows * v).norm() / (top * v.norm()));
    }
    return worst;
  }));

  out.push_back(check("first-order response error decays quadratically", 0.5, [&] {
    RandomSource rng(seed + 10);
    double worst = 0.0;
    std::vector<Vector3> dirs;
    for (int i = 0; i < 16; ++i) dirs.push_back(rng.unit_vector());
    for (int i = 0; i < 20; ++i) {
      PerturbationParams p = PerturbationParams::from_vector(rng.parameters());
      for (const auto& obs : standard_observables()) {
        p.eta = 1e-2;
        const double e1 = first_order_remainder(p, obs, dirs);
        p.eta = 5e-3;
        const double e2 = first_order_remainder(p, obs, dirs);
        if (e1 < 1e-13) continue;
        worst = std::max(worst, std::abs(e1 / e2 - 4.0));
      }
    }
    return worst;
  }));

  out.push_back(check("ideal filter: f = (1+kz)/2, repeatable, post-state (0,0,kz)", 1e-14, [&] {
    RandomSource rng(seed + 11);
    const Instrument ideal = ideal_instrument();
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const BlochState s(rng.unit_vector());
      const double kz = s.vector().z();
      worst = std::max(worst, std::abs(probability(ideal.up, s) - 0.5 * (1.0 + kz)));
      worst = std::max(worst, std::abs(successive_probability(ideal, ideal.up, s) - 0.5 * (1.0 + kz)));
      worst = std::max(worst, (nonselective_apply(ideal, s).vector() - Vector3(0, 0, kz)).cwiseAbs().maxCoeff());
      const auto sel = selective_apply(ideal.up, s);
      if (sel.post) worst = std::max(worst, std::abs(probability(ideal.up, *sel.post) - 1.0));
    }
    return worst;
  }));

  return out;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-6s %-62s %-11s %s\n", "status", "check", "worst", "tolerance");
  out << buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-6s %-62s %-11.3e %.1e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.worst, r.tolerance);
    out << buf;
  }
  return out.str();
}

}  // namespace sgkit
