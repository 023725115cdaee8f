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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitianInput : public Error {
 public:
  using Error::Error;
};

class DegenerateKraus : public Error {
 public:
  using Error::Error;
};

class UnnormalizedInstrument : public Error {
 public:
  using Error::Error;
};

class SingularNormalization : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidRotation : public Error {
 public:
  using Error::Error;
};

class NonAffineResponse : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class RankDeficientFit : public Error {
 public:
  RankDeficientFit(std::string observable, const std::string& what)
      : Error(what), observable_(std::move(observable)) {}
  const std::string& observable() const noexcept { return observable_; }

 private:
  std::string observable_;
};

/// Malformed dataset or document. `line()` is 1-based, 0 when not applicable.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Configuration rejected by schema validation; `key()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : "config key '" + key + "': " + what),
        key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace sgkit
