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

#ifndef PETBENCH_HARNESS_H_
#define PETBENCH_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "petbench/anonymity.h"
#include "petbench/data_core.h"
#include "petbench/learners.h"
#include "petbench/run_log.h"
#include "petbench/tradeoff.h"

namespace petbench {

struct Treatment {
  enum class Kind { kBenchmark, kKAnon, kSynthetic };
  Kind kind = Kind::kBenchmark;
  std::size_t k = 0;

  // "benchmark", "kanon:<k>", "synthetic". Throws kConfig.
  static Treatment Parse(std::string_view key);
  std::string Key() const;
  std::string DisplayName() const;  // "Benchmark", "k=3", "Synthetic"

  friend bool operator==(const Treatment&, const Treatment&) = default;
};

// Benchmark first, then k ascending, then synthetic.
bool TreatmentLess(const std::string& a, const std::string& b);

inline constexpr std::string_view kModelKnn = "knn";
inline constexpr std::string_view kModelLogReg = "logreg";
inline constexpr std::string_view kModelNn = "nn";

struct ExperimentConfig {
  std::vector<std::string> datasets = {"census_income"};
  std::vector<std::string> treatments = {"benchmark", "kanon:3", "kanon:10", "kanon:27", "synthetic"};
  std::vector<std::string> models = {"knn", "logreg", "nn"};
  int repetitions = 10;
  std::uint64_t master_seed = 42;
  std::string meter = "sysfs";  // or "simulated"
  // "steady" reads wall time. "virtual" charges each phase from an
  // operation-count model so simulated runs are reproducible bit for bit.
  std::string clock = "steady";
  double simulated_watts = 7.512;
  double idle_seconds = 1.0;
  SplitSpec split;
  std::optional<std::size_t> max_rows;
  std::filesystem::path data_dir;
  std::map<std::string, std::filesystem::path> schemas;      // per dataset
  std::map<std::string, std::filesystem::path> hierarchies;  // per dataset
  std::filesystem::path output_dir = "runs/default";
  double alpha = 0.05;
  double max_record_suppression = 1.0;
  bool k_plus_one = false;
  std::size_t neighbours = kDefaultNeighbours;
  std::size_t hidden_width = kDefaultHiddenWidth;
  TrainConfig logreg = DefaultLogRegConfig();
  TrainConfig nn = DefaultNnConfig();
  PrivacyScale privacy = PrivacyScale::Default();

  // Throws kConfig.
  void Validate() const;
  nlohmann::json ToJson() const;
  static ExperimentConfig FromJson(const nlohmann::json& j);
  // Relative paths resolve against the config file's directory.
  static ExperimentConfig Load(const std::filesystem::path& path);
  // FNV-1a over the canonical JSON, 16 hex digits.
  std::string Hash() const;
  std::filesystem::path LogPath() const { return output_dir / "run_log.jsonl"; }
};

// Seed for (master, path...) by chained splitmix64.
std::uint64_t DeriveSeed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

struct RunOptions {
  bool overwrite = false;
  // Called after each record is written.
  std::function<void(const RunRecord&)> on_record;
};

// Runs the grid, appending to cfg.LogPath(). Refuses (kPrecondition) when
// that log already holds records with this config hash unless overwrite is
// set, in which case the log is replaced.
RunLog RunExperiment(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace petbench

#endif  // PETBENCH_HARNESS_H_
