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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sgkit/commands.hpp"
#include "sgkit/estimation.hpp"
#include "sgkit/instrument.hpp"
#include "sgkit/linearization.hpp"
#include "sgkit/serialize.hpp"
#include "sgkit/verify.hpp"

namespace py = pybind11;
using namespace sgkit;

namespace {

KrausOperator make_kraus(Complex alpha, const ComplexTriple& beta) { return {alpha, beta}; }

ObservableSpec parse_label(const std::string& label) {
  for (const auto& obs : standard_observables()) {
    if (obs.label() == label) return obs;
  }
  for (int m = 0; m < 3; ++m) {
    ObservableSpec obs{Protocol::Successive, Outcome::Down, m};
    if (obs.label() == label) return obs;
  }
  throw py::value_error("unknown observable '" + label + "'");
}

py::object json_to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_sgkit, m) {
  m.doc() = "Non-ideal Stern-Gerlach filter model: simulation and parameter recovery";

  py::register_exception<Error>(m, "SgkitError", PyExc_ValueError);

  py::class_<KrausOperator>(m, "KrausOperator")
      .def(py::init(&make_kraus), py::arg("alpha"), py::arg("beta"))
      .def_readwrite("alpha", &KrausOperator::alpha)
      .def_readwrite("beta", &KrausOperator::beta)
      .def("weight", &KrausOperator::weight);

  py::class_<Instrument>(m, "Instrument")
      .def(py::init<KrausOperator, KrausOperator>(), py::arg("up"), py::arg("down"))
      .def_readwrite("up", &Instrument::up)
      .def_readwrite("down", &Instrument::down);

  m.def("ideal_instrument", &ideal_instrument);
  m.def("exact_normalize", &exact_normalize, py::arg("instrument"));
  m.def("normalization_residual", &normalization_residual, py::arg("instrument"));

  m.def(
      "probability",
      [](const KrausOperator& k, const Vector3& r) { return probability(k, BlochState(r)); },
      py::arg("kraus"), py::arg("bloch"));
  m.def(
      "effect",
      [](const KrausOperator& k) {
        const Effect e = effect_of(k);
        return py::make_tuple(e.weight, e.xi);
      },
      py::arg("kraus"), "Effect A A^dag as (weight, xi).");
  m.def(
      "selective_post_state",
      [](const KrausOperator& k, const Vector3& r) -> py::object {
        const auto out = selective_apply(k, BlochState(r));
        if (!out.post) return py::none();
        return py::cast(Vector3(out.post->vector()));
      },
      py::arg("kraus"), py::arg("bloch"));
  m.def(
      "nonselective_post_state",
      [](const Instrument& inst, const Vector3& r) { return Vector3(nonselective_apply(inst, BlochState(r)).vector()); },
      py::arg("instrument"), py::arg("bloch"));
  m.def(
      "rotate_kraus",
      [](const KrausOperator& k, const Vector3& axis, double angle) { return rotate_kraus(k, RotationSpec(axis, angle)); },
      py::arg("kraus"), py::arg("axis"), py::arg("angle"));
  m.def(
      "cyclic_kraus", [](const KrausOperator& k, int mm) { return rotate_kraus(k, cyclic_rotation(mm)); },
      py::arg("kraus"), py::arg("m"));

  m.def("parameter_names", [] {
    const auto& n = parameter_names();
    return std::vector<std::string>(n.begin(), n.end());
  });
  m.def("observable_labels", [] {
    std::vector<std::string> out;
    for (const auto& obs : standard_observables()) out.push_back(obs.label());
    return out;
  });
  m.def(
      "affine_coefficients",
      [](const ParameterVector& params, const std::string& label) {
        return Eigen::Vector4d(affine_coefficients(PerturbationParams::from_vector(params), parse_label(label)).c);
      },
      py::arg("parameters"), py::arg("observable"),
      "First-order (c0, c1, c2, c3) of an observable for a 16-parameter vector.");
  m.def(
      "design_matrix",
      [](const std::string& mode) {
        const auto obs = standard_observables();
        const LinearSystem sys = build_system(obs, constraint_mode_from_string(mode));
        return py::make_tuple(Eigen::MatrixXd(sys.rows), sys.row_labels);
      },
      py::arg("constraints") = "derived");
  m.def("project_to_normalized", &project_to_normalized, py::arg("parameters"));
  m.def("compare_with_paper", [] { return json_to_python(to_json(compare_with_paper())); });

  m.def("verify", [] {
    py::list out;
    for (const auto& r : run_verification()) {
      py::dict d;
      d["name"] = r.name;
      d["passed"] = r.passed;
      d["worst"] = r.worst;
      d["tolerance"] = r.tolerance;
      out.append(d);
    }
    return out;
  });

  auto run = [](auto&& fn) {
    std::ostringstream log;
    const int code = fn(log);
    return py::make_tuple(code, log.str());
  };
  m.def(
      "simulate",
      [run](const std::filesystem::path& config, const std::filesystem::path& out) {
        return run([&](std::ostream& log) { return cli::cmd_simulate(config, out, log); });
      },
      py::arg("config"), py::arg("out"), "Run `sg simulate`; returns (exit status, log).");
  m.def(
      "fit",
      [run](const std::filesystem::path& data, const std::filesystem::path& out) {
        return run([&](std::ostream& log) { return cli::cmd_fit(data, out, log); });
      },
      py::arg("data"), py::arg("out"));
  m.def(
      "roundtrip",
      [run](const std::filesystem::path& config, const std::filesystem::path& out) {
        return run([&](std::ostream& log) { return cli::cmd_roundtrip(config, out, log); });
      },
      py::arg("config"), py::arg("out"));
}
