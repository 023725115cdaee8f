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

// Command implementations behind the `sg` tool. Each returns the process
// exit status and reports diagnostics on `log`.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "sgkit/linearization.hpp"

namespace sgkit::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kInputError = 2,
  kRankDeficient = 3,
  kIncompatible = 4,
  kVerifyFailed = 5,
};

struct RecoverOptions {
  ConstraintMode constraints = ConstraintMode::Derived;
  std::optional<double> max_residual;
  double compatibility_threshold = 3.0;
};

int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int cmd_fit(const std::filesystem::path& data, const std::filesystem::path& out, std::ostream& log);
/// Writes `out` (JSON) and `out` with extension .txt (text report).
int cmd_recover(const std::filesystem::path& fits, const std::filesystem::path& out,
                const RecoverOptions& options, std::ostream& log);
int cmd_verify(std::ostream& out);
/// simulate -> fit -> recover in a scratch directory; the report also
/// carries a comparison against the configured parameters.
int cmd_roundtrip(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);

}  // namespace sgkit::cli
