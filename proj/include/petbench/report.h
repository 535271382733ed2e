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

#ifndef PETBENCH_REPORT_H_
#define PETBENCH_REPORT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "petbench/run_log.h"
#include "petbench/stats.h"

namespace petbench {

// Train + evaluate cost per (dataset, model, treatment) against Benchmark.
struct DeviationRow {
  std::string dataset;
  std::string model;
  std::string treatment;
  std::size_t repetitions = 0;
  double mean_duration_s = 0.0;
  double mean_joules = 0.0;
  double mean_joules_adjusted = 0.0;
  long duration_pct = 0;  // rounded half away from zero
  long joules_pct = 0;

  friend bool operator==(const DeviationRow&, const DeviationRow&) = default;
};

// Treat-phase cost per (dataset, treatment), reported separately.
struct TreatRow {
  std::string dataset;
  std::string treatment;
  std::size_t repetitions = 0;
  double mean_duration_s = 0.0;
  double mean_joules = 0.0;

  friend bool operator==(const TreatRow&, const TreatRow&) = default;
};

struct UTestBlock {
  std::string dataset;
  std::string model;
  std::vector<std::string> treatments;
  // p[i][j]: probability treatment i uses more energy than j; empty on the diagonal.
  std::vector<std::vector<std::optional<double>>> p;

  friend bool operator==(const UTestBlock&, const UTestBlock&) = default;
};

struct AccuracyRow {
  std::string dataset;
  std::string treatment;
  std::string model;
  std::size_t repetitions = 0;
  double mean_accuracy = 0.0;

  friend bool operator==(const AccuracyRow&, const AccuracyRow&) = default;
};

struct SuppressionRow {
  std::string dataset;
  std::size_t k = 0;
  double percent = 0.0;

  friend bool operator==(const SuppressionRow&, const SuppressionRow&) = default;
};

struct ReportTables {
  double alpha = 0.05;
  std::vector<DeviationRow> deviation;
  std::vector<TreatRow> treat;
  std::vector<UTestBlock> utest;
  std::vector<AccuracyRow> accuracy;
  std::vector<SuppressionRow> suppression;

  nlohmann::json ToJson() const;
  static ReportTables FromJson(const nlohmann::json& j);
  friend bool operator==(const ReportTables&, const ReportTables&) = default;
};

// Throws kMissingBenchmark when a (dataset, model) has no benchmark runs.
std::vector<DeviationRow> DeviationTable(std::span<const RunRecord> log);
std::vector<TreatRow> TreatTable(std::span<const RunRecord> log);
// Per-repetition train + evaluate joules, pairwise Greater tests. Throws
// kPrecondition with fewer than 2 treatments or 2 repetitions each.
UTestBlock UTestMatrix(std::span<const RunRecord> log, const std::string& dataset, const std::string& model);
std::vector<AccuracyRow> AccuracyTable(std::span<const RunRecord> log);
std::vector<SuppressionRow> SuppressionTable(std::span<const RunRecord> log);

// All tables; U-test blocks only where their precondition holds. Throws
// kEmptyLog when nothing was evaluated.
ReportTables BuildReport(std::span<const RunRecord> log, double alpha = 0.05);

enum class ReportFormat { kMarkdown, kCsv, kJson };
// "md", "markdown", "csv", "json". Throws kConfig.
ReportFormat ParseReportFormat(std::string_view name);

std::string RenderMarkdown(const ReportTables& t);
std::string RenderJson(const ReportTables& t);
// File name to contents, one CSV per table.
std::map<std::string, std::string> RenderCsv(const ReportTables& t);

// Writes report.md, report.json or the CSV set into `dir`. Throws kIoError.
std::vector<std::filesystem::path> WriteReport(const ReportTables& t, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace petbench

#endif  // PETBENCH_REPORT_H_
