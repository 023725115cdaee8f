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

// Synthetic experiments: direction grids, measurement plans, exact and
// binomially sampled datasets, and the CSV dataset format.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgkit/linearization.hpp"

namespace sgkit {

inline constexpr std::string_view kDatasetVersion = "sgkit-v1";
inline constexpr std::string_view kDatasetHeader =
    "protocol,m,outcome,theta,phi_az,shots,successes,probability";

struct MeasurementSetting {
  ObservableSpec observable;
  Direction direction;
};

/// shots == 0 marks an exact record whose `probability` is populated.
struct MeasurementRecord {
  MeasurementSetting setting;
  std::uint64_t shots = 0;
  std::uint64_t successes = 0;
  std::optional<double> probability;

  bool exact() const { return shots == 0; }
  /// successes / shots, or the exact probability.
  double frequency() const;
};

struct GridSpec {
  int n_theta = 4;
  int n_phi = 8;
};

struct ExperimentConfig {
  PerturbationParams perturbation;
  GridSpec grid;
  bool single = true;
  bool successive = true;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool strict_normalization = false;
};

struct DatasetMetadata {
  double eta = 0.0;
  bool strict_normalization = false;
  std::uint64_t seed = 0;
  GridSpec grid;
};

struct Dataset {
  DatasetMetadata metadata;
  std::vector<MeasurementRecord> records;
};

/// Midpoint rule in theta, uniform in phi. Throws InvalidGrid unless
/// n_theta >= 2 and n_phi >= 3.
std::vector<Direction> make_grid(int n_theta, int n_phi);

/// Rank of the (1, kx, ky, kz) design matrix over `directions`.
int affine_design_rank(const std::vector<Direction>& directions, double rel_tol = 1e-10);

/// Ordered by protocol (single first), rotation, outcome, grid index.
std::vector<MeasurementSetting> plan_settings(const ExperimentConfig& config);

/// The simulated device: build_perturbed, then exact_normalize when
/// config.strict_normalization is set.
Instrument model_instrument(const ExperimentConfig& config);

std::vector<MeasurementRecord> exact_dataset(const ExperimentConfig& config);

/// Per-setting streams are seeded from (seed, setting index), so the output
/// does not depend on evaluation order.
std::vector<MeasurementRecord> sampled_dataset(const ExperimentConfig& config);

std::uint64_t setting_seed(std::uint64_t seed, std::uint64_t index);

DatasetMetadata metadata_of(const ExperimentConfig& config);

/// Exact when config.shots == 0, sampled otherwise.
Dataset simulate(const ExperimentConfig& config);

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws FormatError carrying the 1-based line number.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace sgkit
