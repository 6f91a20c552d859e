// Copyright (C) 2026 The spikelab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

#include "spikelab/config.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/harness.hpp"
#include "spikelab/mp_law.hpp"

namespace py = pybind11;
using namespace spikelab;

namespace {

// Configs and reports cross the boundary as JSON text.
ScenarioConfig parse(const std::string& text) { return config_from_json(nlohmann::json::parse(text)); }

py::dict summary(const ExperimentResult& r) {
  py::dict d;
  d["phi"] = r.phi;
  d["level"] = r.level;
  d["valid"] = r.valid;
  d["invalid"] = r.invalid;
  d["rejections"] = r.rejections;
  d["rate"] = r.rate;
  d["se"] = r.se;
  d["statistics"] = r.valid_statistics();
  return d;
}

}  // namespace

PYBIND11_MODULE(_spikelab, m) {
  m.doc() = "Spiked covariance eigenvector inference";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SubcriticalError>(m, "SubcriticalError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("spectral_edges", [](double y) {
    const auto e = spectral_edges(y);
    return py::make_tuple(e.lower, e.upper);
  });
  m.def("theta", [](double d, double y) { return theta(d, y); }, py::arg("d"), py::arg("y"));
  m.def("gamma_shrink", [](double x, double y) { return gamma_shrink(x, y); }, py::arg("x"), py::arg("y"));
  m.def("vartheta", [](double d, double y) { return vartheta(d, y); }, py::arg("d"), py::arg("y"));
  m.def("aux_funcs", [](double d, double y) {
    const auto a = aux_funcs(d, y);
    py::dict out;
    out["f"] = a.f;
    out["g"] = a.g;
    out["h"] = a.h;
    out["l"] = a.l;
    return out;
  }, py::arg("d"), py::arg("y"));
  m.def("stieltjes_m1", &stieltjes_m1, py::arg("z"), py::arg("y"));
  m.def("stieltjes_m2", &stieltjes_m2, py::arg("z"), py::arg("y"));

  m.def("run_null", [](const std::string& config, int threads) {
    const auto c = parse(config);
    py::gil_scoped_release release;
    auto r = run_null(c, threads);
    py::gil_scoped_acquire acquire;
    return summary(r);
  }, py::arg("config"), py::arg("threads") = 1);
  m.def("run_power", [](const std::string& config, const std::vector<double>& phis, int threads) {
    const auto c = parse(config);
    std::vector<ExperimentResult> rs;
    {
      py::gil_scoped_release release;
      rs = run_power(c, phis, threads);
    }
    py::list out;
    for (const auto& r : rs) out.append(summary(r));
    return out;
  }, py::arg("config"), py::arg("phis"), py::arg("threads") = 1);
  m.def("run_ecdf", [](const std::string& config, int threads) {
    const auto c = parse(config);
    EcdfResult e;
    {
      py::gil_scoped_release release;
      e = run_ecdf(c, threads);
    }
    py::dict out = summary(e.experiment);
    out["reference"] = e.reference;
    out["ks"] = e.ks;
    return out;
  }, py::arg("config"), py::arg("threads") = 1);
  m.def("test_data", [](const Eigen::MatrixXd& Y, const std::string& hypothesis) {
    const auto input = test_input_from_json(nlohmann::json::parse(hypothesis));
    return test_data(Y, input).to_json().dump();
  }, py::arg("Y"), py::arg("hypothesis"));
  m.def("normalize_config", [](const std::string& config) { return config_to_json(parse(config)).dump(); });
}
