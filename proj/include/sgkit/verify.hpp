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

// Self-check suite behind `sg verify`: model invariants checked against
// explicit 2x2 matrix computations at fixed seeds.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgkit {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

std::vector<CheckResult> run_verification(std::uint64_t seed = 20240521);
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace sgkit
