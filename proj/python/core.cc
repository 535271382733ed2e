// Copyright 2026 The petbench Authors
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
//

// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the petbench package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "petbench/anonymity.h"
#include "petbench/datasets.h"
#include "petbench/energy.h"
#include "petbench/error.h"
#include "petbench/harness.h"
#include "petbench/report.h"
#include "petbench/run_log.h"
#include "petbench/stats.h"
#include "petbench/synthesis.h"
#include "petbench/tradeoff.h"

namespace py = pybind11;
using nlohmann::json;

namespace {

petbench::Alternative ParseAlternative(const std::string& s) {
  if (s == "greater") return petbench::Alternative::kGreater;
  if (s == "less") return petbench::Alternative::kLess;
  if (s == "two-sided" || s == "two_sided") return petbench::Alternative::kTwoSided;
  throw py::value_error("alternative must be greater, less or two-sided");
}

petbench::UMethod ParseMethod(const std::string& s) {
  if (s == "auto") return petbench::UMethod::kAuto;
  if (s == "exact") return petbench::UMethod::kExact;
  if (s == "normal") return petbench::UMethod::kNormalApprox;
  throw py::value_error("method must be auto, exact or normal");
}

std::vector<petbench::TradeoffPoint> PointsFromJson(const std::string& text) {
  std::vector<petbench::TradeoffPoint> out;
  for (const auto& p : json::parse(text)) {
    out.push_back({p.value("dataset", ""), p.value("treatment", ""), p.value("model", ""),
                   p.at("joules").get<double>(), p.at("accuracy").get<double>(), p.at("privacy").get<double>()});
  }
  return out;
}

petbench::PreparedData Prepare(const std::string& dataset, const std::string& data_dir, std::uint64_t seed) {
  petbench::PrepareOptions po;
  po.data_dir = data_dir;
  po.split.seed = seed;
  return petbench::PrepareDataset(dataset, po);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "petbench C++ core";

  py::register_exception<petbench::Error>(m, "PetbenchError", PyExc_RuntimeError);

  m.def("sha256_hex", [](py::bytes data) { return petbench::Sha256Hex(std::string(data)); });
  m.def("default_data_dir", [] { return petbench::DefaultDataDir().string(); });

  m.def(
      "fetch",
      [](const std::string& dataset, const std::string& dest, const std::string& mirror) {
        petbench::FetchOptions fo;
        fo.base_url = mirror;
        std::vector<std::string> out;
        const auto root = dest.empty() ? petbench::DefaultDataDir() : std::filesystem::path(dest);
        for (const auto& p : petbench::FetchDataset(dataset, root, fo)) out.push_back(p.string());
        return out;
      },
      py::arg("dataset"), py::arg("dest") = "", py::arg("mirror") = "");

  m.def(
      "prepare_json",
      [](const std::string& dataset, const std::string& data_dir, std::uint64_t seed) {
        const auto d = Prepare(dataset, data_dir, seed);
        return json{{"dataset", dataset},
                    {"raw_rows", d.raw_rows},
                    {"dropped_missing", d.dropped_missing},
                    {"train_rows", d.train.rows()},
                    {"test_rows", d.test.rows()},
                    {"columns", d.train.cols()}}
            .dump();
      },
      py::arg("dataset"), py::arg("data_dir") = "", py::arg("seed") = 42);

  m.def(
      "anonymize_json",
      [](const std::string& dataset, std::size_t k, const std::string& data_dir, double max_suppression) {
        const auto d = Prepare(dataset, data_dir, 42);
        const auto h = petbench::LoadHierarchies(petbench::DefaultHierarchyPath(petbench::FindDataset(dataset)),
                                                 d.train);
        petbench::AnonymizeOptions ao;
        ao.k = k;
        ao.max_record_suppression = max_suppression;
        py::gil_scoped_release release;
        return petbench::Anonymize(d.train, d.schema, h, ao).report.ToJson().dump();
      },
      py::arg("dataset"), py::arg("k"), py::arg("data_dir") = "", py::arg("max_suppression") = 1.0);

  m.def(
      "synth_utility_json",
      [](const std::string& dataset, std::uint64_t seed, const std::string& data_dir) {
        const auto d = Prepare(dataset, data_dir, 42);
        py::gil_scoped_release release;
        const auto sample = petbench::SampleCopula(petbench::FitCopula(d.train), d.train.rows(), seed);
        return petbench::CompareUtility(d.train, sample).ToJson().dump();
      },
      py::arg("dataset"), py::arg("seed"), py::arg("data_dir") = "");

  m.def(
      "mann_whitney_json",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& alternative,
         const std::string& method) {
        return petbench::MannWhitney(a, b, ParseAlternative(alternative), ParseMethod(method)).ToJson().dump();
      },
      py::arg("a"), py::arg("b"), py::arg("alternative") = "two-sided", py::arg("method") = "auto");

  m.def("consumed_microjoules", [](std::uint64_t start, std::uint64_t end, std::uint64_t max_energy) {
    return petbench::ConsumedMicrojoules(start, end, max_energy);
  });

  m.def("pareto_mask_json", [](const std::string& points) {
    const auto pts = PointsFromJson(points);
    return petbench::ParetoMask(pts);
  });

  m.def("scenario_rank_json", [](const std::string& points, int scenario) {
    const auto pts = PointsFromJson(points);
    json out = json::array();
    for (const auto& r : petbench::ScenarioRank(pts, petbench::ScenarioPreset(scenario).weights))
      out.push_back(r.ToJson());
    return out.dump();
  });

  m.def("run_experiment_json", [](const std::string& config) {
    const auto cfg = petbench::ExperimentConfig::FromJson(json::parse(config));
    petbench::RunOptions ro;
    ro.overwrite = true;
    {
      py::gil_scoped_release release;
      petbench::RunExperiment(cfg, ro);
    }
    return cfg.LogPath().string();
  });

  m.def(
      "report",
      [](const std::string& log_path, const std::string& format, double alpha) {
        const auto log = petbench::ReadRunLog(log_path);
        const auto tables = petbench::BuildReport(log, alpha);
        switch (petbench::ParseReportFormat(format)) {
          case petbench::ReportFormat::kMarkdown: return petbench::RenderMarkdown(tables);
          case petbench::ReportFormat::kJson: return petbench::RenderJson(tables);
          case petbench::ReportFormat::kCsv: break;
        }
        std::string out;
        for (const auto& [name, body] : petbench::RenderCsv(tables)) out += "# " + name + "\n" + body;
        return out;
      },
      py::arg("log"), py::arg("format") = "md", py::arg("alpha") = 0.05);
}
