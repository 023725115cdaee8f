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

#include "sgkit/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sgkit/errors.hpp"

namespace sgkit {

namespace {

constexpr int kAr = 0, kAi = 1, kBrx = 2, kBry = 3, kBrz = 4, kBix = 5, kBiy = 6, kBiz = 7;
constexpr int kDown = 8;

constexpr std::array<double, 3> kSingleNodes = {-1.0, 0.0, 1.0};
constexpr std::array<double, 5> kSuccessiveNodes = {-2.0, -1.0, 0.0, 1.0, 2.0};

std::span<const double> default_nodes(Protocol protocol) {
  if (protocol == Protocol::Single) return kSingleNodes;
  return kSuccessiveNodes;
}

// Probe directions for the affine extraction: the six axis directions plus
// two generic ones.
const std::array<Vector3, 8>& probe_directions() {
  static const std::array<Vector3, 8> dirs = {
      Vector3::UnitX(), Vector3(-Vector3::UnitX()), Vector3::UnitY(), Vector3(-Vector3::UnitY()),
      Vector3::UnitZ(), Vector3(-Vector3::UnitZ()), Vector3(1, 2, 3).normalized(),
      Vector3(-2, 1, -1).normalized()};
  return dirs;
}

}  // namespace

const std::array<std::string, kParameterCount>& parameter_names() {
  static const std::array<std::string, kParameterCount> names = {
      "a_r_up",   "a_i_up",   "b_rx_up",   "b_ry_up",   "b_rz_up",   "b_ix_up",
      "b_iy_up",  "b_iz_up",  "a_r_down",  "a_i_down",  "b_rx_down", "b_ry_down",
      "b_rz_down", "b_ix_down", "b_iy_down", "b_iz_down"};
  return names;
}

int parameter_index(std::string_view name) {
  const auto& names = parameter_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown parameter name: " + std::string(name));
  return static_cast<int>(it - names.begin());
}

ParameterVector PerturbationParams::to_vector() const {
  ParameterVector v;
  auto fill = [&v](int offset, Complex a, const ComplexTriple& b) {
    v(offset + kAr) = a.real();
    v(offset + kAi) = a.imag();
    v.segment<3>(offset + kBrx) = b.real();
    v.segment<3>(offset + kBix) = b.imag();
  };
  fill(0, a_up, b_up);
  fill(kDown, a_down, b_down);
  return v;
}

PerturbationParams PerturbationParams::from_vector(const ParameterVector& v, double eta) {
  auto a = [&v](int offset) { return Complex{v(offset + kAr), v(offset + kAi)}; };
  auto b = [&v](int offset) {
    ComplexTriple out;
    for (int i = 0; i < 3; ++i) out(i) = Complex{v(offset + kBrx + i), v(offset + kBix + i)};
    return out;
  };
  PerturbationParams p;
  p.a_up = a(0);
  p.b_up = b(0);
  p.a_down = a(kDown);
  p.b_down = b(kDown);
  p.eta = eta;
  return p;
}

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::Single ? "single" : "successive";
}

std::string ObservableSpec::label() const {
  std::string out(to_string(protocol));
  out += '/';
  out += to_string(outcome);
  out += "/m" + std::to_string(rotation);
  return out;
}

std::vector<ObservableSpec> standard_observables() {
  std::vector<ObservableSpec> out;
  for (int m = 0; m < 3; ++m) {
    out.push_back({Protocol::Single, Outcome::Up, m});
    out.push_back({Protocol::Single, Outcome::Down, m});
  }
  for (int m = 0; m < 3; ++m) out.push_back({Protocol::Successive, Outcome::Up, m});
  return out;
}

Instrument build_perturbed(const PerturbationParams& p) {
  const Instrument ideal = ideal_instrument();
  return {KrausOperator{ideal.up.alpha + p.eta * p.a_up, ideal.up.beta + p.eta * p.b_up},
          KrausOperator{ideal.down.alpha + p.eta * p.a_down, ideal.down.beta + p.eta * p.b_down}};
}

double observable_expectation(const Instrument& inst, const ObservableSpec& obs, const Vector3& k) {
  const KrausOperator second =
      rotate_kraus(inst.branch(obs.outcome), cyclic_rotation(obs.rotation));
  if (obs.protocol == Protocol::Single) return expectation(second, k);
  return successive_expectation(inst, second, k);
}

int eta_degree(Protocol protocol) { return protocol == Protocol::Single ? 2 : 4; }

double interpolated_linear_coefficient(std::span<const double> nodes,
                                       std::span<const double> values) {
  if (nodes.size() != values.size() || nodes.size() < 2) {
    throw std::invalid_argument("interpolation needs matching node/value lists of length >= 2");
  }
  // p'(0) = sum_i values_i * L_i'(0)
  const std::size_t n = nodes.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) denom *= nodes[i] - nodes[j];
    }
    double deriv = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      double prod = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && j != l) prod *= -nodes[j];
      }
      deriv += prod;
    }
    total += values[i] * deriv / denom;
  }
  return total;
}

double linear_response(const PerturbationParams& p, const ObservableSpec& obs, const Vector3& k,
                       std::span<const double> nodes) {
  std::vector<double> values;
  values.reserve(nodes.size());
  PerturbationParams q = p;
  for (double eta : nodes) {
    q.eta = eta;
    values.push_back(observable_expectation(build_perturbed(q), obs, k));
  }
  return interpolated_linear_coefficient(nodes, values);
}

double linear_response(const PerturbationParams& p, const ObservableSpec& obs, const Direction& k) {
  return linear_response(p, obs, k.unit(), default_nodes(obs.protocol));
}

double first_order_remainder(const PerturbationParams& p, const ObservableSpec& obs,
                             std::span<const Vector3> directions) {
  const Instrument ideal = ideal_instrument();
  const Instrument perturbed = build_perturbed(p);
  double worst = 0.0;
  for (const Vector3& k : directions) {
    const double slope = linear_response(p, obs, k, default_nodes(obs.protocol));
    const double f = observable_expectation(perturbed, obs, k);
    const double f0 = observable_expectation(ideal, obs, k);
    worst = std::max(worst, std::abs(f - f0 - p.eta * slope));
  }
  return worst;
}

AffineCoefficients affine_coefficients(const PerturbationParams& p, const ObservableSpec& obs) {
  const auto& dirs = probe_directions();
  Eigen::Matrix<double, 8, 4> design;
  Eigen::Matrix<double, 8, 1> values;
  for (int i = 0; i < 8; ++i) {
    design(i, 0) = 1.0;
    design.block<1, 3>(i, 1) = dirs[i].transpose();
    values(i) = linear_response(p, obs, dirs[i], default_nodes(obs.protocol));
  }
  AffineCoefficients out;
  out.c = design.householderQr().solve(values);
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double misfit = (design * out.c - values).cwiseAbs().maxCoeff();
  if (misfit > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "first-order response of " << obs.label() << " is not affine (misfit " << misfit << ")";
    throw NonAffineResponse(msg.str());
  }
  return out;
}

std::string_view to_string(ConstraintMode mode) {
  return mode == ConstraintMode::Derived ? "derived" : "paper";
}

ConstraintMode constraint_mode_from_string(std::string_view text) {
  if (text == "derived") return ConstraintMode::Derived;
  if (text == "paper") return ConstraintMode::PaperTranscribed;
  throw std::invalid_argument("constraint mode must be 'derived' or 'paper', got '" +
                              std::string(text) + "'");
}

namespace {

// Column i holds the coefficients for the i-th unit parameter vector.
Eigen::Matrix<double, 4, kParameterCount> coefficient_jacobian(const ObservableSpec& obs) {
  Eigen::Matrix<double, 4, kParameterCount> jac;
  for (int i = 0; i < kParameterCount; ++i) {
    const auto p = PerturbationParams::from_vector(ParameterVector::Unit(i));
    jac.col(i) = affine_coefficients(p, obs).c;
  }
  return jac;
}

std::string coefficient_label(const ObservableSpec& obs, int j) {
  return obs.label() + ":c" + std::to_string(j);
}

}  // namespace

LinearSystem design_matrix(std::span<const ObservableSpec> observables) {
  std::set<int> norm_rotations = {0};
  for (const auto& obs : observables) {
    if (obs.protocol == Protocol::Single) norm_rotations.insert(obs.rotation);
  }
  const auto total_rows = static_cast<Eigen::Index>(4 * (observables.size() + norm_rotations.size()));

  LinearSystem sys;
  sys.mode = ConstraintMode::Derived;
  sys.rows.resize(total_rows, kParameterCount);
  sys.rhs = Eigen::VectorXd::Zero(total_rows);
  Eigen::Index row = 0;
  for (const auto& obs : observables) {
    const auto jac = coefficient_jacobian(obs);
    for (int j = 0; j < 4; ++j, ++row) {
      sys.rows.row(row) = jac.row(j);
      sys.row_labels.push_back(coefficient_label(obs, j));
      sys.sources.push_back({false, obs, j, 1.0});
    }
  }
  for (int m : norm_rotations) {
    const ObservableSpec up{Protocol::Single, Outcome::Up, m};
    const ObservableSpec down{Protocol::Single, Outcome::Down, m};
    const auto jac = coefficient_jacobian(up) + coefficient_jacobian(down);
    for (int j = 0; j < 4; ++j, ++row) {
      sys.rows.row(row) = jac.row(j);
      sys.row_labels.push_back("norm/m" + std::to_string(m) + ":c" + std::to_string(j));
      sys.sources.push_back({true, up, j, 0.0});
    }
  }
  return sys;
}

namespace {

struct Term {
  int column;
  double coefficient;
};

struct PaperEquation {
  std::string group;
  std::string text;
  std::vector<Term> terms;
  bool constraint;
  ObservableSpec observable;
  int coefficient;
  double scale;
  std::string rhs;
};

ParameterVector row_of(const std::vector<Term>& terms) {
  ParameterVector v = ParameterVector::Zero();
  for (const auto& t : terms) v(t.column) += t.coefficient;
  return v;
}

const std::vector<PaperEquation>& paper_equations() {
  const ObservableSpec single_up{Protocol::Single, Outcome::Up, 0};
  const ObservableSpec single_down{Protocol::Single, Outcome::Down, 0};
  const ObservableSpec succ_z{Protocol::Successive, Outcome::Up, 0};
  const ObservableSpec succ_x{Protocol::Successive, Outcome::Up, 1};
  const ObservableSpec succ_y{Protocol::Successive, Outcome::Up, 2};
  constexpr int U = 0, D = kDown;
  static const std::vector<PaperEquation> eqs = {
      // First-order prediction, constant / sin(t)cos(p) / sin(t)sin(p) / cos(t) terms.
      {"prediction", "(a_r+b_rz)_up -> constant term", {{U + kAr, 1}, {U + kBrz, 1}}, false,
       single_up, 0, 1.0, "c0_up"},
      {"prediction", "(a_r+b_rz)_up -> sin(theta)cos(phi) term", {{U + kAr, 1}, {U + kBrz, 1}},
       false, single_up, 1, 1.0, "c1_up"},
      {"prediction", "(b_rx-b_iy)_up -> sin(theta)sin(phi) term", {{U + kBrx, 1}, {U + kBiy, -1}},
       false, single_up, 2, 1.0, "c2_up"},
      {"prediction", "(b_ry+b_ix)_up -> cos(theta) term", {{U + kBry, 1}, {U + kBix, 1}}, false,
       single_up, 3, 1.0, "c3_up"},
      {"prediction", "(a_r+b_rz)_down -> constant term", {{D + kAr, 1}, {D + kBrz, 1}}, false,
       single_down, 0, 1.0, "c0_down"},
      {"prediction", "(a_r+b_rz)_down -> sin(theta)cos(phi) term", {{D + kAr, 1}, {D + kBrz, 1}},
       false, single_down, 1, 1.0, "c1_down"},
      {"prediction", "(b_rx-b_iy)_down -> sin(theta)sin(phi) term",
       {{D + kBrx, 1}, {D + kBiy, -1}}, false, single_down, 2, 1.0, "c2_down"},
      {"prediction", "(b_ry+b_ix)_down -> cos(theta) term", {{D + kBry, 1}, {D + kBix, 1}}, false,
       single_down, 3, 1.0, "c3_down"},
      // Normalization.
      {"normalization", "(a_r+b_rz)_up + (a_r+b_rz)_down = 0",
       {{U + kAr, 1}, {U + kBrz, 1}, {D + kAr, 1}, {D + kBrz, 1}}, true, single_up, 0, 0.0, "0"},
      {"normalization", "(b_rx-b_iy)_up + (b_rx-b_iy)_down = 0",
       {{U + kBrx, 1}, {U + kBiy, -1}, {D + kBrx, 1}, {D + kBiy, -1}}, true, single_up, 0, 0.0,
       "0"},
      {"normalization", "(b_ry+b_ix)_up + (b_ry+b_ix)_down = 0",
       {{U + kBry, 1}, {U + kBix, 1}, {D + kBry, 1}, {D + kBix, 1}}, true, single_up, 0, 0.0,
       "0"},
      // Identification against the single-device fit.
      {"identification", "a_r_up + b_rz_up = c0_up", {{U + kAr, 1}, {U + kBrz, 1}}, false,
       single_up, 0, 1.0, "c0_up"},
      {"identification", "b_rx_up - b_iy_up = c2_up", {{U + kBrx, 1}, {U + kBiy, -1}}, false,
       single_up, 2, 1.0, "c2_up"},
      {"identification", "b_ry_up + b_ix_up = c3_up", {{U + kBry, 1}, {U + kBix, 1}}, false,
       single_up, 3, 1.0, "c3_up"},
      // Successive measurements; the axis suffix names the second device's main axis.
      {"successive", "(a_r+b_rz+b_iy)_up + b_iy_down = c0z_up",
       {{U + kAr, 1}, {U + kBrz, 1}, {U + kBiy, 1}, {D + kBiy, 1}}, false, succ_z, 0, 1.0,
       "c0z_up"},
      {"successive", "(a_r+b_rz-b_ix)_up - b_ix_down = c0x_up",
       {{U + kAr, 1}, {U + kBrz, 1}, {U + kBix, -1}, {D + kBix, -1}}, false, succ_x, 0, 1.0,
       "c0x_up"},
      {"successive", "a_r_up + b_ry_up = c0y_up", {{U + kAr, 1}, {U + kBry, 1}}, false, succ_y, 0,
       1.0, "c0y_up"},
      {"successive", "b_iy_up + b_iy_down = 2 c0z_up", {{U + kBiy, 1}, {D + kBiy, 1}}, false,
       succ_z, 0, 2.0, "2 c0z_up"},
      {"successive", "b_ix_up + b_ix_down = 2 c0x_up", {{U + kBix, 1}, {D + kBix, 1}}, false,
       succ_x, 0, 2.0, "2 c0x_up"},
      {"successive", "(a_r-b_rz)_up + (a_r-b_rz)_down = 2 c1z_up",
       {{U + kAr, 1}, {U + kBrz, -1}, {D + kAr, 1}, {D + kBrz, -1}}, false, succ_z, 1, 2.0,
       "2 c1z_up"},
      {"successive", "(a_i-b_iz)_up + (a_i-b_iz)_down = 2 c1x_up",
       {{U + kAi, 1}, {U + kBiz, -1}, {D + kAi, 1}, {D + kBiz, -1}}, false, succ_x, 1, 2.0,
       "2 c1x_up"},
  };
  return eqs;
}

bool rows_equal(const ParameterVector& a, const ParameterVector& b) {
  return (a - b).cwiseAbs().maxCoeff() <= 1e-9;
}

bool magnitudes_equal(const ParameterVector& a, const ParameterVector& b) {
  return (a.cwiseAbs() - b.cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-9;
}

ParameterVector unit_max(const ParameterVector& v) {
  const double m = v.cwiseAbs().maxCoeff();
  return m > 0.0 ? ParameterVector(v / m) : v;
}

}  // namespace

LinearSystem paper_system() {
  LinearSystem sys;
  sys.mode = ConstraintMode::PaperTranscribed;
  std::vector<const PaperEquation*> used;
  for (const auto& eq : paper_equations()) {
    if (eq.group != "prediction") used.push_back(&eq);
  }
  const auto n = static_cast<Eigen::Index>(used.size());
  sys.rows.resize(n, kParameterCount);
  sys.rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& eq = *used[static_cast<std::size_t>(r)];
    sys.rows.row(r) = row_of(eq.terms).transpose();
    sys.row_labels.push_back(eq.group + ": " + eq.text);
    sys.sources.push_back({eq.constraint, eq.observable, eq.coefficient, eq.scale});
  }
  return sys;
}

Eigen::Matrix<double, 4, kParameterCount> normalization_rows() {
  return coefficient_jacobian({Protocol::Single, Outcome::Up, 0}) +
         coefficient_jacobian({Protocol::Single, Outcome::Down, 0});
}

ParameterVector project_to_normalized(const ParameterVector& v) {
  const auto rows = normalization_rows();
  const Eigen::Matrix4d gram = rows * rows.transpose();
  return v - rows.transpose() * gram.ldlt().solve(rows * v);
}

LinearSystem build_system(std::span<const ObservableSpec> observables, ConstraintMode mode) {
  return mode == ConstraintMode::Derived ? design_matrix(observables) : paper_system();
}

Effect EffectExpansion::at(double eta) const {
  const double w = weight0 + eta * weight1;
  return {w, (vector0 + eta * vector1) / w};
}

std::pair<EffectExpansion, EffectExpansion> first_order_expansion(const PerturbationParams& p) {
  const double ar_u = p.a_up.real(), ar_d = p.a_down.real();
  const Vector3 br_u = p.b_up.real(), bi_u = p.b_up.imag();
  const Vector3 br_d = p.b_down.real(), bi_d = p.b_down.imag();
  EffectExpansion up{0.5, ar_u + br_u.z(), 0.5 * Vector3::UnitZ(),
                     Vector3(br_u.x() - bi_u.y(), br_u.y() + bi_u.x(), ar_u + br_u.z())};
  EffectExpansion down{0.5, ar_d - br_d.z(), -0.5 * Vector3::UnitZ(),
                       Vector3(br_d.x() + bi_d.y(), br_d.y() - bi_d.x(), br_d.z() - ar_d)};
  return {up, down};
}

std::pair<Effect, Effect> first_order_effects(const PerturbationParams& p) {
  const auto [up, down] = first_order_expansion(p);
  return {up.at(p.eta), down.at(p.eta)};
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Confirmed:
      return "Confirmed";
    case Verdict::SignDiscrepancy:
      return "SignDiscrepancy";
    case Verdict::StructureDiscrepancy:
      return "StructureDiscrepancy";
  }
  return "?";
}

std::string format_row(const ParameterVector& row) {
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < kParameterCount; ++i) {
    const double c = row(i);
    if (std::abs(c) <= 1e-12) continue;
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    if (std::abs(mag - 1.0) > 1e-12) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g ", mag);
      out << buf;
    }
    out << parameter_names()[static_cast<std::size_t>(i)];
    first = false;
  }
  return first ? "0" : out.str();
}

ComparisonReport compare_with_paper() {
  const auto observables = standard_observables();
  const LinearSystem gen = design_matrix(observables);
  auto find_row = [&gen](const std::string& label) -> Eigen::Index {
    for (Eigen::Index r = 0; r < gen.row_count(); ++r) {
      if (gen.row_labels[static_cast<std::size_t>(r)] == label) return r;
    }
    throw std::logic_error("generated system lacks row " + label);
  };

  ComparisonReport report;
  for (const auto& eq : paper_equations()) {
    ComparisonEntry entry;
    entry.group = eq.group;
    entry.equation = eq.text;
    entry.paper_row = row_of(eq.terms);
    entry.paper_rhs = eq.rhs;

    if (eq.constraint) {
      // Constraints are defined up to scale: compare rows normalized to unit
      // max-norm against the best-aligned generated normalization row.
      const ParameterVector target = unit_max(entry.paper_row);
      Eigen::Index best = -1;
      double best_cos = -1.0;
      for (Eigen::Index r = 0; r < gen.row_count(); ++r) {
        if (!gen.sources[static_cast<std::size_t>(r)].constraint) continue;
        const ParameterVector g = gen.rows.row(r).transpose();
        const double cosine = std::abs(g.dot(target)) / (g.norm() * target.norm());
        if (cosine > best_cos + 1e-12) {
          best_cos = cosine;
          best = r;
        }
      }
      ParameterVector g = unit_max(ParameterVector(gen.rows.row(best).transpose()));
      if (g.dot(target) < 0) g = -g;
      entry.generated_label = gen.row_labels[static_cast<std::size_t>(best)];
      entry.generated_row = gen.rows.row(best).transpose();
      if (rows_equal(target, g)) {
        entry.verdict = Verdict::Confirmed;
      } else if (magnitudes_equal(target, g)) {
        entry.verdict = Verdict::SignDiscrepancy;
      } else {
        entry.verdict = Verdict::StructureDiscrepancy;
      }
      for (Eigen::Index r = 0; r < gen.row_count(); ++r) {
        if (r == best || !gen.sources[static_cast<std::size_t>(r)].constraint) continue;
        const ParameterVector other = unit_max(ParameterVector(gen.rows.row(r).transpose()));
        if (rows_equal(target, other) || rows_equal(target, -other)) {
          entry.also_matches.push_back(gen.row_labels[static_cast<std::size_t>(r)]);
        }
      }
    } else {
      const ParameterVector target = entry.paper_row / eq.scale;
      const std::string label = coefficient_label(eq.observable, eq.coefficient);
      const Eigen::Index r0 = find_row(label);
      entry.generated_label = label;
      entry.generated_row = gen.rows.row(r0).transpose();
      if (rows_equal(target, entry.generated_row)) {
        entry.verdict = Verdict::Confirmed;
      } else if (magnitudes_equal(target, entry.generated_row)) {
        entry.verdict = Verdict::SignDiscrepancy;
      } else {
        entry.verdict = Verdict::StructureDiscrepancy;
      }
      for (Eigen::Index r = 0; r < gen.row_count(); ++r) {
        if (r == r0 || gen.sources[static_cast<std::size_t>(r)].constraint) continue;
        if (rows_equal(target, gen.rows.row(r).transpose())) {
          entry.also_matches.push_back(gen.row_labels[static_cast<std::size_t>(r)]);
        }
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  std::string group;
  for (const auto& e : entries) {
    if (e.group != group) {
      group = e.group;
      out << "[" << group << "]\n";
    }
    out << "  " << to_string(e.verdict) << ": " << e.equation << "\n";
    out << "      paper     : " << format_row(e.paper_row) << " = " << e.paper_rhs << "\n";
    out << "      generated : " << format_row(e.generated_row) << "  (" << e.generated_label
        << ")\n";
    if (!e.also_matches.empty()) {
      out << "      paper row equals generated:";
      for (const auto& m : e.also_matches) out << " " << m;
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace sgkit
