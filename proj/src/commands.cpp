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

#include "sgkit/commands.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sgkit/errors.hpp"
#include "sgkit/estimation.hpp"
#include "sgkit/experiment.hpp"
#include "sgkit/serialize.hpp"
#include "sgkit/verify.hpp"

namespace sgkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  return in;
}

json load_json(const fs::path& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(0, path.string() + ": " + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoFailure("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void save_dataset(const Dataset& ds, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  write_dataset(ds, out);
  if (!out) throw IoFailure("failed writing " + path.string());
}

fs::path text_path(fs::path out) { return out.replace_extension(".txt"); }

RecoveryReport build_report(const std::vector<FitResult>& fits, double eta, const RecoverOptions& options) {
  std::vector<ObservableSpec> observables;
  for (const auto& f : fits) observables.push_back(f.observable);
  const LinearSystem system = build_system(observables, options.constraints);

  RecoveryReport report;
  report.eta = eta;
  report.fits = fits;
  report.goodness = goodness_of_fit(fits, options.compatibility_threshold);
  report.comparison = compare_with_paper();
  report.max_residual = options.max_residual;
  RecoveryOptions ropts;
  ropts.max_residual = options.max_residual;
  try {
    report.recovery = recover_parameters(fits, system, ropts);
  } catch (const InconsistentSystem& e) {
    report.recovery = e.result();
    report.consistent = false;
  }
  return report;
}

int finish_report(const RecoveryReport& report, const fs::path& out, std::ostream& log) {
  write_json(out, report.to_json());
  write_text(text_path(out), report.to_text());
  if (!report.compatible()) {
    log << "incompatible: ";
    if (!report.goodness.compatible) log << "goodness of fit exceeds chi2/dof " << report.goodness.threshold << " ";
    if (!report.consistent) log << "residual " << report.recovery.residual_norm << " exceeds " << *report.max_residual;
    log << "\n";
    return kIncompatible;
  }
  return kOk;
}

template <typename Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const FormatError& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const RankDeficientFit& e) {
    log << "error: " << e.what() << "\n";
    return kRankDeficient;
  } catch (const IoFailure& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace

int cmd_simulate(const fs::path& config, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    const Dataset ds = simulate(cfg.experiment);
    save_dataset(ds, out);
    log << "wrote " << ds.records.size() << " records to " << out.string() << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_fit(const fs::path& data, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    std::ifstream in = open_input(data);
    const Dataset ds = read_dataset(in);
    const auto fits = fit_dataset(ds);
    write_json(out, fits_document(fits, ds.metadata.eta));
    log << "fitted " << fits.size() << " observables\n";
    return static_cast<int>(kOk);
  });
}

int cmd_recover(const fs::path& fits_path, const fs::path& out, const RecoverOptions& options,
                std::ostream& log) {
  return guarded(log, [&] {
    double eta = 0.0;
    const auto fits = parse_fits_document(load_json(fits_path), &eta);
    const RecoveryReport report = build_report(fits, eta, options);
    return finish_report(report, out, log);
  });
}

int cmd_verify(std::ostream& out) {
  const auto results = run_verification();
  out << format_check_table(results);
  bool ok = true;
  for (const auto& r : results) {
    if (!r.passed) {
      out << "failed: " << r.name;
      if (!r.detail.empty()) out << " (" << r.detail << ")";
      out << "\n";
      ok = false;
    }
  }
  return ok ? kOk : kVerifyFailed;
}

int cmd_roundtrip(const fs::path& config, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    static std::atomic<unsigned> counter{0};
    const fs::path work = fs::temp_directory_path() /
                          ("sgkit-roundtrip-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(work);
    struct Cleanup {
      fs::path dir;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(dir, ec);
      }
    } cleanup{work};

    const fs::path data = work / "dataset.csv";
    const fs::path fits_path = work / "fits.json";
    save_dataset(simulate(cfg.experiment), data);
    const Dataset ds = read_dataset(data);
    const auto fits = fit_dataset(ds);
    write_json(fits_path, fits_document(fits, ds.metadata.eta));
    double eta = 0.0;
    const auto reloaded = parse_fits_document(load_json(fits_path), &eta);

    RecoverOptions options;
    options.constraints = cfg.constraints;
    options.max_residual = cfg.max_residual;
    options.compatibility_threshold = cfg.compatibility_threshold;
    RecoveryReport report = build_report(reloaded, eta, options);
    // Recovered values are in units of eta; with eta = 0 there is no deviation to recover.
    const auto& pert = cfg.experiment.perturbation;
    const ParameterVector truth = pert.eta > 0.0 ? pert.to_vector() : ParameterVector::Zero();
    report.truth = check_against_truth(report.recovery, truth);
    log << "row-space error " << report.truth->row_space_error << ", residual "
        << report.recovery.residual_norm << "\n";
    return finish_report(report, out, log);
  });
}

}  // namespace sgkit::cli
