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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "petbench/anonymity.h"
#include "petbench/datasets.h"
#include "petbench/energy.h"
#include "petbench/error.h"
#include "petbench/harness.h"
#include "petbench/report.h"
#include "petbench/synthesis.h"
#include "petbench/tradeoff.h"

namespace fs = std::filesystem;
using petbench::Error;
using petbench::ErrorCode;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Globals {
  std::string meter;  // empty: command default
  std::string data_dir;
};

petbench::PreparedData Prepare(const Globals& g, const std::string& dataset, const std::string& schema,
                               std::uint64_t seed, double fraction, std::optional<std::size_t> max_rows) {
  petbench::PrepareOptions po;
  po.data_dir = g.data_dir;
  po.schema_path = schema;
  po.split.seed = seed;
  po.split.train_fraction = fraction;
  po.max_rows = max_rows;
  return petbench::PrepareDataset(dataset, po);
}

// Runs `work` under the --meter backend when one was chosen.
std::optional<petbench::EnergySample> MaybeMeter(const Globals& g, const std::string& label,
                                                 const std::function<void()>& work) {
  if (g.meter.empty()) {
    work();
    return std::nullopt;
  }
  petbench::MeterBackend backend = petbench::SimulatedBackend{};
  if (g.meter == "sysfs") backend = petbench::PowercapBackend{petbench::DefaultPowercapRoot()};
  auto meter = petbench::Meter::Open(backend);
  return meter.Measure(label, work);
}

void PrintJson(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"petbench: privacy / energy / accuracy trade-off benchmark"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--meter", g.meter, "Energy backend")->check(CLI::IsMember({"sysfs", "simulated"}));
  app.add_option("--data-dir", g.data_dir, "Dataset root (default: <resources>/data)");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download a dataset and verify its digests");
  std::string fetch_id, fetch_dest, fetch_mirror;
  fetch->add_option("dataset", fetch_id, "census_income or student_performance")->required();
  fetch->add_option("--dest", fetch_dest, "Target root (default: --data-dir)");
  fetch->add_option("--mirror", fetch_mirror, "Base URL replacing the upstream location");

  // prep
  auto* prep = app.add_subcommand("prep", "Clean and split a dataset, writing train/test CSVs");
  std::string prep_id, prep_out, prep_schema;
  std::uint64_t prep_seed = 42;
  double prep_fraction = 2.0 / 3.0;
  std::optional<std::size_t> prep_max_rows;
  prep->add_option("dataset", prep_id)->required();
  prep->add_option("--out", prep_out, "Output directory");
  prep->add_option("--schema", prep_schema, "Schema JSON");
  prep->add_option("--seed", prep_seed, "Split seed");
  prep->add_option("--train-fraction", prep_fraction)->check(CLI::Range(0.0, 1.0));
  prep->add_option("--max-rows", prep_max_rows);

  // anonymize
  auto* anon = app.add_subcommand("anonymize", "k-anonymize the training split");
  std::size_t anon_k = 0;
  std::string anon_id = "census_income", anon_schema, anon_hier, anon_out;
  std::uint64_t anon_seed = 42;
  double anon_max_supp = 1.0;
  bool anon_k1 = false;
  anon->add_option("--k", anon_k, "Minimum equivalence class size")->required();
  anon->add_option("--dataset", anon_id);
  anon->add_option("--schema", anon_schema);
  anon->add_option("--hierarchies", anon_hier, "Hierarchy JSON");
  anon->add_option("--seed", anon_seed, "Split seed");
  anon->add_option("--max-suppression", anon_max_supp, "Largest fraction of suppressed records")
      ->check(CLI::Range(0.0, 1.0));
  anon->add_flag("--k-plus-one", anon_k1, "Require k + 1 rows per class");
  anon->add_option("--out", anon_out, "Write the anonymized table as CSV");

  // synth
  auto* synth = app.add_subcommand("synth", "Fit a Gaussian copula and sample synthetic rows");
  std::uint64_t synth_seed = 0;
  std::string synth_id = "census_income", synth_schema, synth_out, synth_model_out;
  std::optional<std::size_t> synth_rows;
  synth->add_option("--seed", synth_seed, "Sampling seed")->required();
  synth->add_option("--dataset", synth_id);
  synth->add_option("--schema", synth_schema);
  synth->add_option("--rows", synth_rows, "Rows to sample (default: training rows)");
  synth->add_option("--out", synth_out, "Write the synthetic table as CSV");
  synth->add_option("--model-out", synth_model_out, "Write the fitted model as JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Run the experiment grid from a config file");
  std::string bench_config;
  bool bench_overwrite = false;
  bench->add_option("--config", bench_config, "Experiment config JSON")->required();
  bench->add_flag("--overwrite", bench_overwrite, "Replace an existing log of the same config");

  // report
  auto* report = app.add_subcommand("report", "Render the result tables of a run log");
  std::string report_log, report_format = "md", report_out;
  double report_alpha = 0.05;
  report->add_option("--log", report_log, "Run log (JSON lines)")->required();
  report->add_option("--format", report_format, "md, csv or json")
      ->check(CLI::IsMember({"md", "markdown", "csv", "json"}));
  report->add_option("--out", report_out, "Output directory (default: stdout)");
  report->add_option("--alpha", report_alpha, "Significance level")->check(CLI::Range(0.0, 1.0));

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Pareto front and scenario ranking of a run log");
  std::string pareto_log, pareto_scale, pareto_dataset;
  int pareto_scenario = 0;
  bool pareto_adjusted = false;
  pareto->add_option("--log", pareto_log)->required();
  pareto->add_option("--scenario", pareto_scenario, "0 all, 1 accuracy, 2 energy")
      ->required()
      ->check(CLI::IsMember({0, 1, 2}));
  pareto->add_option("--privacy-scale", pareto_scale, "JSON object treatment -> rank");
  pareto->add_option("--dataset", pareto_dataset, "Restrict to one dataset");
  pareto->add_flag("--adjusted", pareto_adjusted, "Use idle-adjusted joules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fetch) {
      petbench::FetchOptions fo;
      fo.base_url = fetch_mirror;
      const fs::path dest = !fetch_dest.empty() ? fs::path(fetch_dest)
                            : !g.data_dir.empty() ? fs::path(g.data_dir)
                                                  : petbench::DefaultDataDir();
      for (const auto& p : petbench::FetchDataset(fetch_id, dest, fo)) std::cout << p.string() << "\n";
    } else if (*prep) {
      petbench::PreparedData data;
      auto sample = MaybeMeter(g, "prepare", [&] {
        data = Prepare(g, prep_id, prep_schema, prep_seed, prep_fraction, prep_max_rows);
      });
      nlohmann::json out = {{"dataset", prep_id},
                            {"raw_rows", data.raw_rows},
                            {"dropped_missing", data.dropped_missing},
                            {"train_rows", data.train.rows()},
                            {"test_rows", data.test.rows()},
                            {"columns", data.train.cols()}};
      if (!prep_out.empty()) {
        fs::create_directories(prep_out);
        const fs::path train = fs::path(prep_out) / (prep_id + ".train.csv");
        const fs::path test = fs::path(prep_out) / (prep_id + ".test.csv");
        data.train.WriteCsv(train);
        data.test.WriteCsv(test);
        out["files"] = {train.string(), test.string()};
      }
      if (sample) out["energy"] = sample->ToJson();
      PrintJson(out);
    } else if (*anon) {
      const auto data = Prepare(g, anon_id, anon_schema, anon_seed, 2.0 / 3.0, std::nullopt);
      const fs::path hpath =
          anon_hier.empty() ? petbench::DefaultHierarchyPath(petbench::FindDataset(anon_id)) : fs::path(anon_hier);
      const auto hierarchies = petbench::LoadHierarchies(hpath, data.train);
      petbench::AnonymizeOptions ao;
      ao.k = anon_k;
      ao.max_record_suppression = anon_max_supp;
      ao.k_plus_one = anon_k1;
      std::optional<petbench::AnonymizationResult> result;
      auto sample = MaybeMeter(g, "treat", [&] {
        result = petbench::Anonymize(data.train, data.schema, hierarchies, ao);
      });
      nlohmann::json out = {{"dataset", anon_id}, {"report", result->report.ToJson()}};
      if (!anon_out.empty()) {
        result->table.WriteCsv(anon_out);
        out["file"] = anon_out;
      }
      if (sample) out["energy"] = sample->ToJson();
      PrintJson(out);
    } else if (*synth) {
      const auto data = Prepare(g, synth_id, synth_schema, 42, 2.0 / 3.0, std::nullopt);
      std::optional<petbench::CopulaModel> model;
      petbench::DataTable sampled;
      auto sample = MaybeMeter(g, "treat", [&] {
        model = petbench::FitCopula(data.train);
        sampled = petbench::SampleCopula(*model, synth_rows.value_or(data.train.rows()), synth_seed);
      });
      nlohmann::json out = {{"dataset", synth_id},
                            {"seed", synth_seed},
                            {"rows", sampled.rows()},
                            {"utility", petbench::CompareUtility(data.train, sampled).ToJson()}};
      if (!synth_out.empty()) {
        sampled.WriteCsv(synth_out);
        out["file"] = synth_out;
      }
      if (!synth_model_out.empty()) {
        std::ofstream f(synth_model_out);
        f << model->ToJson().dump() << "\n";
        if (!f) throw Error(ErrorCode::kIoError, "cannot write " + synth_model_out);
        out["model_file"] = synth_model_out;
      }
      if (sample) out["energy"] = sample->ToJson();
      PrintJson(out);
    } else if (*bench) {
      auto cfg = petbench::ExperimentConfig::Load(bench_config);
      if (!g.meter.empty()) cfg.meter = g.meter;
      if (!g.data_dir.empty()) cfg.data_dir = g.data_dir;
      if (cfg.meter != "simulated") cfg.clock = "steady";
      petbench::RunOptions ro;
      ro.overwrite = bench_overwrite;
      ro.on_record = [](const petbench::RunRecord& r) {
        if (r.phase != petbench::kPhaseEvaluate && r.ok()) return;
        std::cerr << r.dataset << " " << r.treatment << " " << r.model << " rep " << r.repetition << " " << r.phase
                  << " " << r.status;
        if (r.accuracy) std::cerr << " accuracy " << *r.accuracy;
        if (!r.error.empty()) std::cerr << " (" << r.error << ")";
        std::cerr << "\n";
      };
      const auto log = petbench::RunExperiment(cfg, ro);
      std::size_t failed = 0;
      for (const auto& r : log) failed += r.ok() ? 0 : 1;
      PrintJson({{"log", cfg.LogPath().string()}, {"records", log.size()}, {"failed", failed},
                 {"config_hash", cfg.Hash()}});
    } else if (*report) {
      const auto log = petbench::ReadRunLog(report_log);
      if (log.empty()) throw Error(ErrorCode::kEmptyLog, report_log + " holds no records");
      const auto tables = petbench::BuildReport(log, report_alpha);
      const auto format = petbench::ParseReportFormat(report_format);
      if (!report_out.empty()) {
        for (const auto& p : petbench::WriteReport(tables, format, report_out)) std::cout << p.string() << "\n";
      } else if (format == petbench::ReportFormat::kMarkdown) {
        std::cout << petbench::RenderMarkdown(tables);
      } else if (format == petbench::ReportFormat::kJson) {
        std::cout << petbench::RenderJson(tables);
      } else {
        bool first = true;
        for (const auto& [name, body] : petbench::RenderCsv(tables)) {
          std::cout << (first ? "" : "\n") << "# " << name << "\n" << body;
          first = false;
        }
      }
    } else if (*pareto) {
      auto log = petbench::ReadRunLog(pareto_log);
      if (!pareto_dataset.empty()) {
        std::erase_if(log, [&](const petbench::RunRecord& r) { return r.dataset != pareto_dataset; });
      }
      petbench::PrivacyScale scale = petbench::PrivacyScale::Default();
      if (!pareto_scale.empty()) {
        std::ifstream f(pareto_scale);
        if (!f) throw Error(ErrorCode::kIoError, "cannot open " + pareto_scale);
        scale = petbench::PrivacyScale::FromJson(nlohmann::json::parse(f));
      }
      const auto points = petbench::CollectPoints(log, scale, pareto_adjusted);
      const auto& preset = petbench::ScenarioPreset(pareto_scenario);
      nlohmann::json ranked = nlohmann::json::array();
      for (const auto& r : petbench::ScenarioRank(points, preset.weights)) ranked.push_back(r.ToJson());
      PrintJson({{"scenario", preset.id},
                 {"name", preset.name},
                 {"weights", preset.weights.ToJson()},
                 {"privacy_scale", scale.ToJson()},
                 {"points", ranked}});
    }
  } catch (const Error& e) {
    std::cerr << "petbench: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "petbench: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
