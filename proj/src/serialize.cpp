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

#include "sgkit/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "sgkit/errors.hpp"

namespace sgkit {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown key");
  }
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

std::uint64_t unsigned_at(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(path, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool bool_at(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path, "must be true or false");
  return v.get<bool>();
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json names_json() {
  json out = json::array();
  for (const auto& n : parameter_names()) out.push_back(n);
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(doc,
                 {"schema", "eta", "parameters", "grid", "protocols", "shots", "seed",
                  "strict_normalization", "constraints", "max_residual",
                  "compatibility_threshold"},
                 "");
  if (!doc.contains("schema")) throw ConfigError("schema", "missing");
  if (!doc["schema"].is_string() || doc["schema"].get<std::string>() != kConfigSchema) {
    throw ConfigError("schema", "must be \"" + std::string(kConfigSchema) + "\"");
  }

  RunConfig cfg;
  auto& exp = cfg.experiment;
  if (doc.contains("eta")) {
    exp.perturbation.eta = number_at(doc, "eta", "eta");
    if (exp.perturbation.eta < 0.0) throw ConfigError("eta", "must be >= 0");
  }
  if (doc.contains("parameters")) {
    const auto& params = doc["parameters"];
    if (!params.is_object()) throw ConfigError("parameters", "must be an object keyed by parameter name");
    ParameterVector v = ParameterVector::Zero();
    for (const auto& [key, value] : params.items()) {
      const std::string path = "parameters." + key;
      int index = -1;
      try {
        index = parameter_index(key);
      } catch (const std::out_of_range&) {
        throw ConfigError(path, "unknown key");
      }
      v(index) = number_at(params, key, path);
    }
    const double eta = exp.perturbation.eta;
    exp.perturbation = PerturbationParams::from_vector(v, eta);
  }
  if (doc.contains("grid")) {
    const auto& grid = doc["grid"];
    if (!grid.is_object()) throw ConfigError("grid", "must be an object");
    reject_unknown(grid, {"n_theta", "n_phi"}, "grid.");
    if (grid.contains("n_theta")) exp.grid.n_theta = static_cast<int>(unsigned_at(grid, "n_theta", "grid.n_theta"));
    if (grid.contains("n_phi")) exp.grid.n_phi = static_cast<int>(unsigned_at(grid, "n_phi", "grid.n_phi"));
    if (exp.grid.n_theta < 2) throw ConfigError("grid.n_theta", "must be >= 2");
    if (exp.grid.n_phi < 3) throw ConfigError("grid.n_phi", "must be >= 3");
  }
  if (doc.contains("protocols")) {
    const auto& list = doc["protocols"];
    if (!list.is_array() || list.empty()) throw ConfigError("protocols", "must be a non-empty array");
    exp.single = exp.successive = false;
    for (const auto& item : list) {
      if (item == "single") {
        exp.single = true;
      } else if (item == "successive") {
        exp.successive = true;
      } else {
        throw ConfigError("protocols", "entries must be \"single\" or \"successive\"");
      }
    }
  }
  if (doc.contains("shots")) exp.shots = unsigned_at(doc, "shots", "shots");
  if (doc.contains("seed")) exp.seed = unsigned_at(doc, "seed", "seed");
  if (doc.contains("strict_normalization")) {
    exp.strict_normalization = bool_at(doc, "strict_normalization", "strict_normalization");
  }
  if (doc.contains("constraints")) {
    if (!doc["constraints"].is_string()) throw ConfigError("constraints", "must be a string");
    try {
      cfg.constraints = constraint_mode_from_string(doc["constraints"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("constraints", e.what());
    }
  }
  if (doc.contains("max_residual") && !doc["max_residual"].is_null()) {
    cfg.max_residual = number_at(doc, "max_residual", "max_residual");
  }
  if (doc.contains("compatibility_threshold")) {
    cfg.compatibility_threshold = number_at(doc, "compatibility_threshold", "compatibility_threshold");
    if (cfg.compatibility_threshold <= 0.0) throw ConfigError("compatibility_threshold", "must be > 0");
  }
  return cfg;
}

json to_json(const RunConfig& config) {
  const auto& exp = config.experiment;
  json params = json::object();
  const ParameterVector v = exp.perturbation.to_vector();
  for (int i = 0; i < kParameterCount; ++i) params[parameter_names()[static_cast<std::size_t>(i)]] = v(i);
  json protocols = json::array();
  if (exp.single) protocols.push_back("single");
  if (exp.successive) protocols.push_back("successive");
  json doc = {{"schema", kConfigSchema},
              {"eta", exp.perturbation.eta},
              {"parameters", params},
              {"grid", {{"n_theta", exp.grid.n_theta}, {"n_phi", exp.grid.n_phi}}},
              {"protocols", protocols},
              {"shots", exp.shots},
              {"seed", exp.seed},
              {"strict_normalization", exp.strict_normalization},
              {"constraints", to_string(config.constraints)},
              {"compatibility_threshold", config.compatibility_threshold}};
  if (config.max_residual) doc["max_residual"] = *config.max_residual;
  return doc;
}

json to_json(const ObservableSpec& obs) {
  return {{"protocol", to_string(obs.protocol)}, {"outcome", to_string(obs.outcome)}, {"m", obs.rotation}};
}

ObservableSpec observable_from_json(const json& doc) {
  ObservableSpec obs;
  const auto protocol = doc.at("protocol").get<std::string>();
  if (protocol == "single") {
    obs.protocol = Protocol::Single;
  } else if (protocol == "successive") {
    obs.protocol = Protocol::Successive;
  } else {
    throw FormatError(0, "bad protocol '" + protocol + "'");
  }
  const auto outcome = doc.at("outcome").get<std::string>();
  if (outcome == "up") {
    obs.outcome = Outcome::Up;
  } else if (outcome == "down") {
    obs.outcome = Outcome::Down;
  } else {
    throw FormatError(0, "bad outcome '" + outcome + "'");
  }
  obs.rotation = doc.at("m").get<int>();
  if (obs.rotation < 0 || obs.rotation > 2) throw FormatError(0, "m must be 0, 1 or 2");
  return obs;
}

json to_json(const FitResult& fit) {
  json cov = json::array();
  for (int i = 0; i < 4; ++i) cov.push_back(vector_json(fit.covariance.row(i).transpose()));
  return {{"observable", to_json(fit.observable)},
          {"label", fit.observable.label()},
          {"coefficients", vector_json(fit.coefficients.c)},
          {"covariance", cov},
          {"chi_square", fit.chi_square},
          {"degrees_of_freedom", fit.degrees_of_freedom},
          {"eta_scale", fit.eta_scale}};
}

FitResult fit_from_json(const json& doc) {
  FitResult fit;
  fit.observable = observable_from_json(doc.at("observable"));
  const auto c = doc.at("coefficients").get<std::vector<double>>();
  if (c.size() != 4) throw FormatError(0, "coefficients must have 4 entries");
  for (int i = 0; i < 4; ++i) fit.coefficients.c(i) = c[static_cast<std::size_t>(i)];
  const auto cov = doc.at("covariance").get<std::vector<std::vector<double>>>();
  if (cov.size() != 4) throw FormatError(0, "covariance must be 4x4");
  for (int i = 0; i < 4; ++i) {
    if (cov[static_cast<std::size_t>(i)].size() != 4) throw FormatError(0, "covariance must be 4x4");
    for (int j = 0; j < 4; ++j) fit.covariance(i, j) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  fit.chi_square = doc.at("chi_square").get<double>();
  fit.degrees_of_freedom = doc.at("degrees_of_freedom").get<int>();
  fit.eta_scale = doc.value("eta_scale", 1.0);
  return fit;
}

json fits_document(std::span<const FitResult> fits, double eta) {
  json list = json::array();
  for (const auto& f : fits) list.push_back(to_json(f));
  return {{"schema", kFitsSchema}, {"eta", eta}, {"fits", list}};
}

std::vector<FitResult> parse_fits_document(const json& doc, double* eta) {
  try {
    if (!doc.is_object() || doc.value("schema", "") != kFitsSchema) {
      throw FormatError(0, "fits document must declare schema " + std::string(kFitsSchema));
    }
    if (eta != nullptr) *eta = doc.at("eta").get<double>();
    std::vector<FitResult> fits;
    for (const auto& item : doc.at("fits")) fits.push_back(fit_from_json(item));
    return fits;
  } catch (const json::exception& e) {
    throw FormatError(0, std::string("malformed fits document: ") + e.what());
  }
}

json to_json(const RecoveryResult& r) {
  json nullspace = json::array();
  for (const auto& v : r.nullspace_basis) nullspace.push_back(vector_json(v));
  json combos = json::array();
  for (std::size_t k = 0; k < r.identifiable_combinations.size(); ++k) {
    const auto& v = r.identifiable_combinations[k];
    combos.push_back({{"vector", vector_json(v)},
                      {"estimate", v.dot(r.parameters)},
                      {"standard_error", r.combination_standard_errors[k]}});
  }
  json stderrs = json::array();
  for (int i = 0; i < kParameterCount; ++i) stderrs.push_back(std::sqrt(std::max(0.0, r.parameter_covariance(i, i))));
  return {{"mode", to_string(r.mode)},
          {"parameter_names", names_json()},
          {"parameters", vector_json(r.parameters)},
          {"parameter_standard_errors", stderrs},
          {"rank", r.rank},
          {"singular_values", vector_json(r.singular_values)},
          {"nullspace", nullspace},
          {"identifiable_combinations", combos},
          {"residual_norm", r.residual_norm},
          {"row_labels", r.row_labels},
          {"rhs", vector_json(r.rhs)}};
}

json to_json(const GoodnessOfFit& gof) {
  json fits = json::array();
  for (const auto& q : gof.fits) {
    fits.push_back({{"observable", q.observable},
                    {"chi_square", q.chi_square},
                    {"degrees_of_freedom", q.degrees_of_freedom},
                    {"reduced_chi_square", q.reduced_chi_square},
                    {"compatible", q.compatible}});
  }
  return {{"fits", fits},
          {"total_chi_square", gof.total_chi_square},
          {"total_degrees_of_freedom", gof.total_degrees_of_freedom},
          {"threshold", gof.threshold},
          {"compatible", gof.compatible}};
}

json to_json(const ComparisonReport& report) {
  json out = json::array();
  for (const auto& e : report.entries) {
    out.push_back({{"group", e.group},
                   {"paper_equation", e.equation},
                   {"paper_row", format_row(e.paper_row)},
                   {"paper_rhs", e.paper_rhs},
                   {"generated_label", e.generated_label},
                   {"generated_row", format_row(e.generated_row)},
                   {"verdict", to_string(e.verdict)},
                   {"also_matches", e.also_matches}});
  }
  return out;
}

TruthCheck check_against_truth(const RecoveryResult& result, const ParameterVector& truth) {
  TruthCheck check;
  check.truth = truth;
  const ParameterVector diff = result.parameters - truth;
  check.row_space_error = (result.row_space_projector * diff).norm();
  for (std::size_t k = 0; k < result.identifiable_combinations.size(); ++k) {
    const double se = result.combination_standard_errors[k];
    const double dev = std::abs(result.identifiable_combinations[k].dot(diff));
    const double z = se > 0.0 ? dev / se : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    check.max_abs_z = std::max(check.max_abs_z, z);
  }
  return check;
}

json to_json(const TruthCheck& check) {
  return {{"truth", vector_json(check.truth)},
          {"row_space_error", check.row_space_error},
          {"max_abs_z", std::isfinite(check.max_abs_z) ? json(check.max_abs_z) : json(nullptr)}};
}

json RecoveryReport::to_json() const {
  json fit_list = json::array();
  for (const auto& f : fits) fit_list.push_back(sgkit::to_json(f));
  json doc = {{"schema", kReportSchema},
              {"eta", eta},
              {"fits", fit_list},
              {"goodness_of_fit", sgkit::to_json(goodness)},
              {"recovery", sgkit::to_json(recovery)},
              {"comparison", sgkit::to_json(comparison)},
              {"consistency",
               {{"max_residual", max_residual ? json(*max_residual) : json(nullptr)},
                {"residual_norm", recovery.residual_norm},
                {"consistent", consistent}}},
              {"compatible", compatible()}};
  if (truth) doc["truth_check"] = sgkit::to_json(*truth);
  return doc;
}

std::string RecoveryReport::to_text() const {
  std::ostringstream out;
  char buf[160];
  out << "sgkit recovery report (constraints: " << to_string(recovery.mode) << ", eta = " << eta << ")\n\n";
  out << "Fits (coefficients in units of eta):\n";
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    const auto& q = goodness.fits[i];
    std::snprintf(buf, sizeof buf, "  %-18s c = [% .6e % .6e % .6e % .6e]  chi2/dof = %.3f\n",
                  f.observable.label().c_str(), f.coefficients[0], f.coefficients[1],
                  f.coefficients[2], f.coefficients[3], q.reduced_chi_square);
    out << buf;
  }
  out << "\nRecovered parameters (minimum-norm):\n";
  for (int i = 0; i < kParameterCount; ++i) {
    std::snprintf(buf, sizeof buf, "  %-10s % .8e  +- %.3e\n", parameter_names()[static_cast<std::size_t>(i)].c_str(),
                  recovery.parameters(i), std::sqrt(std::max(0.0, recovery.parameter_covariance(i, i))));
    out << buf;
  }
  out << "\nrank " << recovery.rank << " of " << kParameterCount << ", nullspace dimension "
      << recovery.nullspace_basis.size() << ", residual norm " << recovery.residual_norm << "\n";
  if (truth) {
    out << "row-space error vs truth " << truth->row_space_error << ", max |z| " << truth->max_abs_z << "\n";
  }
  out << "\nComparison with the transcribed equations:\n" << comparison.to_text();
  out << "\ncompatibility: " << (compatible() ? "compatible" : "INCOMPATIBLE") << " (chi2/dof threshold "
      << goodness.threshold;
  if (max_residual) out << ", max residual " << *max_residual;
  out << ")\n";
  return out.str();
}

}  // namespace sgkit
