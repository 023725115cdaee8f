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

// Seeded random generators for instruments, states and rotations, shared by
// the verification suite, tests and benchmarks.

#pragma once

#include <cstdint>
#include <random>

#include "sgkit/instrument.hpp"
#include "sgkit/linearization.hpp"

namespace sgkit {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  Complex complex(double scale = 1.0) { return {scale * uniform(), scale * uniform()}; }
  ComplexTriple triple(double scale = 1.0) { return {complex(scale), complex(scale), complex(scale)}; }

  Vector3 unit_vector() {
    std::normal_distribution<double> gauss;
    Vector3 v;
    do {
      v = {gauss(engine_), gauss(engine_), gauss(engine_)};
    } while (v.norm() < 1e-6);
    return v.normalized();
  }

  /// Uniform in the unit ball; every fourth draw is pure.
  BlochState state() {
    const Vector3 dir = unit_vector();
    const double radius = (++draws_ % 4 == 0) ? 1.0 : std::cbrt(uniform(0.0, 1.0));
    return BlochState(radius * dir);
  }

  KrausOperator kraus(double scale = 0.5) { return {complex(scale), triple(scale)}; }

  /// A random Kraus pair, exactly normalized.
  Instrument instrument() { return exact_normalize({kraus(), kraus()}); }

  RotationSpec rotation() { return RotationSpec(unit_vector(), uniform(-6.5, 6.5)); }

  ParameterVector parameters() {
    ParameterVector v;
    for (int i = 0; i < kParameterCount; ++i) v(i) = uniform();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace sgkit
