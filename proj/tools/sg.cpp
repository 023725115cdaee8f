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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sgkit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sg: non-ideal Stern-Gerlach filter simulation and parameter recovery"};
  app.require_subcommand(1);

  std::string config, out, data, fits, constraints = "derived";
  std::optional<double> max_residual;
  double threshold = 3.0;

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset from a run config");
  simulate->add_option("--config", config, "Run config (JSON)")->required();
  simulate->add_option("--out", out, "Dataset CSV to write")->required();

  auto* fit = app.add_subcommand("fit", "Fit affine deviation models per observable");
  fit->add_option("--data", data, "Dataset CSV")->required();
  fit->add_option("--out", out, "Fits JSON to write")->required();

  auto* recover = app.add_subcommand("recover", "Recover the 16 instrument parameters from fits");
  recover->add_option("--fits", fits, "Fits JSON")->required();
  recover->add_option("--out", out, "Report JSON to write (a .txt report is written alongside)")->required();
  recover->add_option("--constraints", constraints, "Constraint system")
      ->check(CLI::IsMember({"derived", "paper"}));
  recover->add_option("--max-residual", max_residual, "Reject systems whose residual norm exceeds this");
  recover->add_option("--threshold", threshold, "Compatibility threshold on chi2/dof");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");

  auto* roundtrip = app.add_subcommand("roundtrip", "simulate, fit and recover in one run");
  roundtrip->add_option("--config", config, "Run config (JSON)")->required();
  roundtrip->add_option("--out", out, "Report JSON to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sgkit::cli::kInputError;
  }

  if (*simulate) return sgkit::cli::cmd_simulate(config, out, std::cerr);
  if (*fit) return sgkit::cli::cmd_fit(data, out, std::cerr);
  if (*recover) {
    sgkit::cli::RecoverOptions options;
    options.constraints = sgkit::constraint_mode_from_string(constraints);
    options.max_residual = max_residual;
    options.compatibility_threshold = threshold;
    return sgkit::cli::cmd_recover(fits, out, options, std::cerr);
  }
  if (*verify) return sgkit::cli::cmd_verify(std::cout);
  if (*roundtrip) return sgkit::cli::cmd_roundtrip(config, out, std::cerr);
  return sgkit::cli::kInputError;
}
