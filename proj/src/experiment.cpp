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

#include "sgkit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "sgkit/errors.hpp"

namespace sgkit {

double MeasurementRecord::frequency() const {
  if (exact()) return probability.value_or(0.0);
  return static_cast<double>(successes) / static_cast<double>(shots);
}

std::vector<Direction> make_grid(int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 3) {
    throw InvalidGrid("grid needs n_theta >= 2 and n_phi >= 3, got " + std::to_string(n_theta) +
                      "x" + std::to_string(n_phi));
  }
  std::vector<Direction> out;
  out.reserve(static_cast<std::size_t>(n_theta * n_phi));
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      out.push_back({theta, 2.0 * std::numbers::pi * j / n_phi});
    }
  }
  return out;
}

int affine_design_rank(const std::vector<Direction>& directions, double rel_tol) {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(directions.size()), 4);
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design.block<1, 3>(r, 1) = directions[i].unit().transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

std::vector<MeasurementSetting> plan_settings(const ExperimentConfig& config) {
  const auto grid = make_grid(config.grid.n_theta, config.grid.n_phi);
  std::vector<MeasurementSetting> out;
  if (config.single) {
    for (int m = 0; m < 3; ++m) {
      for (Outcome o : {Outcome::Up, Outcome::Down}) {
        for (const auto& d : grid) out.push_back({{Protocol::Single, o, m}, d});
      }
    }
  }
  if (config.successive) {
    for (int m = 0; m < 3; ++m) {
      for (const auto& d : grid) out.push_back({{Protocol::Successive, Outcome::Up, m}, d});
    }
  }
  return out;
}

Instrument model_instrument(const ExperimentConfig& config) {
  const Instrument raw = build_perturbed(config.perturbation);
  return config.strict_normalization ? exact_normalize(raw) : raw;
}

std::vector<MeasurementRecord> exact_dataset(const ExperimentConfig& config) {
  const Instrument inst = model_instrument(config);
  std::vector<MeasurementRecord> out;
  for (const auto& s : plan_settings(config)) {
    const double p = observable_expectation(inst, s.observable, s.direction.unit());
    out.push_back({s, 0, 0, std::clamp(p, 0.0, 1.0)});
  }
  return out;
}

std::uint64_t setting_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a combination of the two words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(index));
}

std::vector<MeasurementRecord> sampled_dataset(const ExperimentConfig& config) {
  if (config.shots == 0) throw std::invalid_argument("sampled_dataset needs shots >= 1");
  auto records = exact_dataset(config);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    const double p = *rec.probability;
    std::mt19937_64 rng(setting_seed(config.seed, i));
    std::binomial_distribution<long long> draw(static_cast<long long>(config.shots), p);
    rec.shots = config.shots;
    rec.successes = static_cast<std::uint64_t>(draw(rng));
    rec.probability.reset();
  }
  return records;
}

DatasetMetadata metadata_of(const ExperimentConfig& config) {
  return {config.perturbation.eta, config.strict_normalization, config.seed, config.grid};
}

Dataset simulate(const ExperimentConfig& config) {
  return {metadata_of(config), config.shots == 0 ? exact_dataset(config) : sampled_dataset(config)};
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view text, std::size_t line, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw FormatError(line, std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

template <typename Int>
Int parse_int(std::string_view text, std::size_t line, const char* what) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(line, std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

void parse_metadata(std::string_view body, std::size_t line, DatasetMetadata& meta,
                    bool& saw_version) {
  const auto eq = body.find('=');
  if (eq == std::string_view::npos) {
    if (body == kDatasetVersion) saw_version = true;
    return;
  }
  const auto key = body.substr(0, eq);
  const auto value = body.substr(eq + 1);
  if (key == "eta") {
    meta.eta = parse_double(value, line, "eta");
  } else if (key == "strict_normalization") {
    if (value != "true" && value != "false") throw FormatError(line, "bad strict_normalization");
    meta.strict_normalization = value == "true";
  } else if (key == "seed") {
    meta.seed = parse_int<std::uint64_t>(value, line, "seed");
  } else if (key == "grid") {
    const auto x = value.find('x');
    if (x == std::string_view::npos) throw FormatError(line, "bad grid '" + std::string(value) + "'");
    meta.grid.n_theta = parse_int<int>(value.substr(0, x), line, "grid");
    meta.grid.n_phi = parse_int<int>(value.substr(x + 1), line, "grid");
  } else if (key == "version") {
    if (value != kDatasetVersion) throw FormatError(line, "unsupported version '" + std::string(value) + "'");
    saw_version = true;
  }
}

}  // namespace

void write_dataset(const Dataset& dataset, std::ostream& out) {
  const auto& meta = dataset.metadata;
  out << "# version=" << kDatasetVersion << "\n";
  out << "# eta=" << format_double(meta.eta) << "\n";
  out << "# strict_normalization=" << (meta.strict_normalization ? "true" : "false") << "\n";
  out << "# seed=" << meta.seed << "\n";
  out << "# grid=" << meta.grid.n_theta << "x" << meta.grid.n_phi << "\n";
  out << kDatasetHeader << "\n";
  for (const auto& r : dataset.records) {
    const auto& obs = r.setting.observable;
    out << to_string(obs.protocol) << ',' << obs.rotation << ',' << to_string(obs.outcome) << ','
        << format_double(r.setting.direction.theta) << ','
        << format_double(r.setting.direction.phi_az) << ',' << r.shots << ',' << r.successes << ',';
    if (r.exact()) out << format_double(r.probability.value_or(0.0));
    out << '\n';
  }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(dataset, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  bool saw_version = false;
  bool saw_header = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (!saw_header) {
      if (text.starts_with('#')) {
        auto body = text.substr(1);
        while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        parse_metadata(body, line, ds.metadata, saw_version);
        continue;
      }
      if (text != kDatasetHeader) throw FormatError(line, "header mismatch, expected '" + std::string(kDatasetHeader) + "'");
      if (!saw_version) throw FormatError(line, "missing version tag " + std::string(kDatasetVersion));
      saw_header = true;
      continue;
    }
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 8) {
      throw FormatError(line, "expected 8 fields, found " + std::to_string(fields.size()));
    }
    MeasurementRecord rec;
    auto& obs = rec.setting.observable;
    if (fields[0] == "single") {
      obs.protocol = Protocol::Single;
    } else if (fields[0] == "successive") {
      obs.protocol = Protocol::Successive;
    } else {
      throw FormatError(line, "bad protocol '" + std::string(fields[0]) + "'");
    }
    obs.rotation = parse_int<int>(fields[1], line, "m");
    if (obs.rotation < 0 || obs.rotation > 2) throw FormatError(line, "m must be 0, 1 or 2");
    if (fields[2] == "up") {
      obs.outcome = Outcome::Up;
    } else if (fields[2] == "down") {
      obs.outcome = Outcome::Down;
    } else {
      throw FormatError(line, "bad outcome '" + std::string(fields[2]) + "'");
    }
    rec.setting.direction.theta = parse_double(fields[3], line, "theta");
    rec.setting.direction.phi_az = parse_double(fields[4], line, "phi_az");
    rec.shots = parse_int<std::uint64_t>(fields[5], line, "shots");
    rec.successes = parse_int<std::uint64_t>(fields[6], line, "successes");
    if (rec.successes > rec.shots && rec.shots > 0) {
      throw FormatError(line, "row " + std::to_string(ds.records.size() + 1) +
                                  ": successes exceed shots");
    }
    if (rec.shots == 0) {
      if (rec.successes != 0) throw FormatError(line, "exact record must have successes = 0");
      if (fields[7].empty()) throw FormatError(line, "exact record needs a probability");
      const double p = parse_double(fields[7], line, "probability");
      if (p < 0.0 || p > 1.0) throw FormatError(line, "probability outside [0, 1]");
      rec.probability = p;
    } else if (!fields[7].empty()) {
      throw FormatError(line, "probability must be empty when shots > 0");
    }
    ds.records.push_back(rec);
  }
  if (!saw_header) throw FormatError(line, "missing header line");
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace sgkit
