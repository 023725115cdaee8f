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

// JSON documents: run configuration, fit results, recovery reports.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgkit/estimation.hpp"
#include "sgkit/experiment.hpp"
#include "sgkit/linearization.hpp"

namespace sgkit {

inline constexpr std::string_view kConfigSchema = "sgkit-config-v1";
inline constexpr std::string_view kFitsSchema = "sgkit-fits-v1";
inline constexpr std::string_view kReportSchema = "sgkit-report-v1";

struct RunConfig {
  ExperimentConfig experiment;
  ConstraintMode constraints = ConstraintMode::Derived;
  std::optional<double> max_residual;
  double compatibility_threshold = 3.0;
};

/// Validates against sgkit-config-v1; unknown keys are rejected.
/// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

nlohmann::json to_json(const ObservableSpec& obs);
ObservableSpec observable_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& doc);

nlohmann::json fits_document(std::span<const FitResult> fits, double eta);
/// Throws FormatError on schema violations.
std::vector<FitResult> parse_fits_document(const nlohmann::json& doc, double* eta = nullptr);

nlohmann::json to_json(const RecoveryResult& result);
nlohmann::json to_json(const GoodnessOfFit& gof);
nlohmann::json to_json(const ComparisonReport& report);

/// Comparison of a recovery against known parameters.
struct TruthCheck {
  ParameterVector truth = ParameterVector::Zero();
  /// |P (recovered - truth)| with P the row-space projector.
  double row_space_error = 0.0;
  /// max_k |v_k . (recovered - truth)| / se_k over identifiable combinations.
  double max_abs_z = 0.0;
};

TruthCheck check_against_truth(const RecoveryResult& result, const ParameterVector& truth);
nlohmann::json to_json(const TruthCheck& check);

struct RecoveryReport {
  double eta = 0.0;
  std::vector<FitResult> fits;
  GoodnessOfFit goodness;
  RecoveryResult recovery;
  ComparisonReport comparison;
  std::optional<double> max_residual;
  bool consistent = true;
  std::optional<TruthCheck> truth;

  bool compatible() const { return goodness.compatible && consistent; }
  nlohmann::json to_json() const;
  std::string to_text() const;
};

}  // namespace sgkit
