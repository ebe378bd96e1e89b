// Copyright 2026 The Paireval Authors.
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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/analysis.h"
#include "paireval/domain.h"
#include "paireval/elo_fit.h"
#include "paireval/elo_model.h"
#include "paireval/serialization.h"
#include "paireval/service.h"
#include "paireval/simulate.h"
#include "paireval/study_config.h"
#include "paireval/table_io.h"

namespace py = pybind11;

namespace paireval {
namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string Fit(const std::vector<std::string>& methods,
                const std::vector<Judgment>& judgments,
                const FitterSettings& settings, bool intervals,
                std::optional<double> fixed_noise) {
  FitOptions options;
  options.fixed_noise = fixed_noise;
  EloFit fit;
  {
    py::gil_scoped_release release;
    fit = intervals ? FitWithIntervals(methods, judgments, settings, options)
                    : FitMap(methods, judgments, settings, options);
  }
  return ToJson(fit).dump();
}

std::string RunSimulation(const std::string& spec_json) {
  SimulationSpec spec = SimulationSpecFromJson(nlohmann::json::parse(spec_json));
  py::gil_scoped_release release;
  return ToJson(Simulate(spec).report).dump();
}

std::string EquivalentQuality(const std::string& table_path,
                              const std::string& ladders_json) {
  LadderConfig config =
      ladders_json.empty()
          ? DefaultLadderConfig()
          : LadderConfigFromJson(nlohmann::json::parse(ladders_json));
  auto points = RatePoints(ReadEloTableFile(table_path));
  EquivalentQualityTable table = EquivalentQualityReport(config, points);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = {{"method", row.anchor_method},
                        {"elo", row.elo},
                        {table.anchor_family, row.anchor_bpp}};
    for (size_t i = 0; i < table.other_families.size(); ++i) {
      r[table.other_families[i]] =
          row.bitrates[i] ? nlohmann::json(*row.bitrates[i]) : nlohmann::json();
    }
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"anchor", table.anchor_family},
                        {"others", table.other_families},
                        {"rows", rows}}
      .dump();
}

std::string NormalizeConfig(const std::string& config_json) {
  return ToJson(ValidateStudyConfig(nlohmann::json::parse(config_json))).dump();
}

}  // namespace
}  // namespace paireval

PYBIND11_MODULE(_paireval, m) {
  using namespace paireval;
  m.doc() = "Pairwise image-quality evaluation core.";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object>
      error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "Error"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object exc = type(py::str(e.what()));
      exc.attr("kind") = e.kind();
      PyErr_SetObject(type.ptr(), exc.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("win_probability", &WinProbability, py::arg("elo_a"), py::arg("elo_b"));
  m.def("observed_choice_probability", &ObservedChoiceProbability,
        py::arg("p_model"), py::arg("noise"));

  py::class_<Judgment>(m, "Judgment")
      .def_static("preference", &Judgment::Preference, py::arg("rater"),
                  py::arg("winner"), py::arg("loser"))
      .def_static("golden", &Judgment::Golden, py::arg("rater"),
                  py::arg("correct"))
      .def_readwrite("rater", &Judgment::rater)
      .def_readwrite("winner", &Judgment::winner)
      .def_readwrite("loser", &Judgment::loser)
      .def_readwrite("is_golden", &Judgment::golden)
      .def_readwrite("correct", &Judgment::correct)
      .def("__eq__", [](const Judgment& a, const Judgment& b) { return a == b; })
      .def("__repr__", [](const Judgment& j) {
        return j.golden ? "Judgment.golden(" + j.rater + ", " +
                              (j.correct ? "True" : "False") + ")"
                        : "Judgment.preference(" + j.rater + ", " +
                              j.winner + ", " + j.loser + ")";
      });

  py::class_<Priors>(m, "Priors")
      .def(py::init<>())
      .def_readwrite("elo_mean", &Priors::elo_mean)
      .def_readwrite("elo_sd", &Priors::elo_sd)
      .def_readwrite("noise_alpha", &Priors::noise_alpha)
      .def_readwrite("noise_beta", &Priors::noise_beta);

  py::class_<FitterSettings>(m, "FitterSettings")
      .def(py::init<>())
      .def_readwrite("priors", &FitterSettings::priors)
      .def_readwrite("noise_max", &FitterSettings::noise_max)
      .def_readwrite("golden_gap", &FitterSettings::golden_gap)
      .def_readwrite("gradient_tolerance", &FitterSettings::gradient_tolerance)
      .def_readwrite("max_iterations", &FitterSettings::max_iterations)
      .def_readwrite("interval_level", &FitterSettings::interval_level);

  m.def("_fit", &Fit, py::arg("methods"), py::arg("judgments"),
        py::arg("settings"), py::arg("intervals"), py::arg("fixed_noise"));
  m.def("_simulate", &RunSimulation, py::arg("spec_json"));
  m.def("_equivalent_quality", &EquivalentQuality, py::arg("table_path"),
        py::arg("ladders_json"));
  m.def("_normalize_config", &NormalizeConfig, py::arg("config_json"));

  py::class_<Service>(m, "_Service")
      .def(py::init([](const std::string& config_json, bool synchronous) {
             ServiceOptions options;
             options.synchronous_refit = synchronous;
             return std::make_unique<Service>(
                 ValidateStudyConfig(nlohmann::json::parse(config_json)),
                 std::move(options));
           }),
           py::arg("config_json"), py::arg("synchronous_refit"))
      .def(
          "handle",
          [](Service& s, const std::string& method, const std::string& path,
             const std::map<std::string, std::string>& query,
             const std::string& body) {
            HttpResponse r;
            {
              py::gil_scoped_release release;
              r = s.Handle(method, path, query, body);
            }
            return py::make_tuple(r.status, r.content_type, py::bytes(r.body));
          },
          py::arg("method"), py::arg("path"), py::arg("query"), py::arg("body"))
      .def("wait_for_refits", &Service::WaitForRefits,
           py::call_guard<py::gil_scoped_release>());
}
