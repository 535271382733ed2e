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

#include "petbench/run_log.h"

#include <fstream>
#include <sstream>

#include "petbench/error.h"

namespace petbench {

nlohmann::json RunRecord::ToJson() const {
  nlohmann::json j = {{"dataset", dataset},
                      {"treatment", treatment},
                      {"model", model},
                      {"rep", repetition},
                      {"phase", phase},
                      {"status", status},
                      {"duration_s", duration_s},
                      {"joules_raw", joules_raw},
                      {"joules_adjusted", joules_adjusted},
                      {"t_start", t_start},
                      {"t_end", t_end},
                      {"config_hash", config_hash}};
  if (accuracy) j["accuracy"] = *accuracy;
  if (!error.empty()) j["error"] = error;
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

RunRecord RunRecord::FromJson(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.treatment = j.at("treatment").get<std::string>();
    r.model = j.value("model", "");
    r.repetition = j.at("rep").get<int>();
    r.phase = j.at("phase").get<std::string>();
    r.status = j.value("status", "ok");
    r.error = j.value("error", "");
    r.duration_s = j.value("duration_s", 0.0);
    r.joules_raw = j.value("joules_raw", 0.0);
    r.joules_adjusted = j.value("joules_adjusted", r.joules_raw);
    if (j.contains("accuracy")) r.accuracy = j.at("accuracy").get<double>();
    r.t_start = j.value("t_start", 0.0);
    r.t_end = j.value("t_end", 0.0);
    r.config_hash = j.value("config_hash", "");
    if (j.contains("extra")) r.extra = j.at("extra");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad run record: ") + e.what());
  }
  return r;
}

RunLog ParseRunLog(std::string_view text) {
  RunLog out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "run log line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(RunRecord::FromJson(j));
  }
  return out;
}

RunLog ReadRunLog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open run log " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseRunLog(buf.str());
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open run log " + path_.string());
}

void RunLogWriter::Append(const RunRecord& record) {
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << record.ToJson().dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed on " + path_.string());
}

}  // namespace petbench
