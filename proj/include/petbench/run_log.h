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

#ifndef PETBENCH_RUN_LOG_H_
#define PETBENCH_RUN_LOG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace petbench {

inline constexpr std::string_view kPhasePrepare = "prepare";
inline constexpr std::string_view kPhaseTreat = "treat";
inline constexpr std::string_view kPhaseTrain = "train";
inline constexpr std::string_view kPhaseEvaluate = "evaluate";

// One metered phase of one grid cell. Prepare and treat records have an
// empty model.
struct RunRecord {
  std::string dataset;
  std::string treatment;
  std::string model;
  int repetition = 0;
  std::string phase;
  std::string status = "ok";
  std::string error;
  double duration_s = 0.0;
  double joules_raw = 0.0;
  double joules_adjusted = 0.0;
  std::optional<double> accuracy;
  double t_start = 0.0;
  double t_end = 0.0;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();

  bool ok() const { return status == "ok"; }
  nlohmann::json ToJson() const;
  static RunRecord FromJson(const nlohmann::json& j);

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

using RunLog = std::vector<RunRecord>;

// One JSON object per line. Throws kIoError / kParseError.
RunLog ReadRunLog(const std::filesystem::path& path);
RunLog ParseRunLog(std::string_view text);

// Appends and flushes one line per call.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::filesystem::path& path);
  void Append(const RunRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace petbench

#endif  // PETBENCH_RUN_LOG_H_
