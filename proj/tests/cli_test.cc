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

// Runs the built CLI as a subprocess and checks exit codes and output shape.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "test_support.h"

namespace {

namespace fs = std::filesystem;
using petbench::testing::ReadFile;
using petbench::testing::TempDir;
using petbench::testing::WriteFile;

const std::string kData = std::string(PETBENCH_TEST_FIXTURES) + "/data";

struct Result {
  int code = -1;
  std::string out;
};

// `args` is pasted into a shell command line; stderr is dropped.
Result Cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + PETBENCH_CLI + "' " + args + " 2>/dev/null";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string WriteConfig(const TempDir& tmp) {
  const nlohmann::json cfg = {{"datasets", {"census_income"}},
                              {"treatments", {"benchmark", "kanon:3", "synthetic"}},
                              {"models", {"knn", "logreg"}},
                              {"repetitions", 2},
                              {"meter", "simulated"},
                              {"clock", "virtual"},
                              {"data_dir", kData},
                              {"output_dir", (tmp / "runs").string()},
                              {"logreg", {{"epochs", 20}}}};
  const fs::path path = tmp / "bench.json";
  WriteFile(path, cfg.dump(2));
  return path.string();
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(Cli("").code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
  EXPECT_EQ(Cli("prep").code, 1);
  EXPECT_EQ(Cli("anonymize").code, 1);
  EXPECT_EQ(Cli("anonymize --k notanumber").code, 1);
  EXPECT_EQ(Cli("synth").code, 1);
  EXPECT_EQ(Cli("pareto --log x.jsonl --scenario 7").code, 1);
  EXPECT_EQ(Cli("report --log x.jsonl --format xml").code, 1);
  EXPECT_EQ(Cli("--meter battery prep census_income").code, 1);
  EXPECT_EQ(Cli("--help").code, 0);
}

TEST(Cli, PrepPrintsCounts) {
  TempDir tmp;
  const auto r = Cli("--data-dir '" + kData + "' prep census_income --out '" + tmp.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["raw_rows"], 600);
  EXPECT_EQ(j["train_rows"].get<int>() + j["test_rows"].get<int>() + j["dropped_missing"].get<int>(), 600);
  EXPECT_TRUE(fs::exists(tmp / "census_income.train.csv"));
}

TEST(Cli, MeterFlagAfterSubcommand) {
  const auto r = Cli("prep census_income --data-dir '" + kData + "' --meter simulated");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j["energy"]["joules"].get<double>(), 0.0);
}

TEST(Cli, AnonymizeAndSynth) {
  auto a = Cli("--data-dir '" + kData + "' anonymize --k 5");
  ASSERT_EQ(a.code, 0);
  const auto report = nlohmann::json::parse(a.out)["report"];
  EXPECT_EQ(report["requested_k"], 5);
  EXPECT_GE(report["achieved_min_class_size"].get<int>(), 5);
  auto s = Cli("--data-dir '" + kData + "' synth --seed 3 --rows 50");
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(nlohmann::json::parse(s.out)["rows"], 50);
}

TEST(Cli, BenchReportPareto) {
  TempDir tmp;
  const auto b = Cli("bench --config '" + WriteConfig(tmp) + "'");
  ASSERT_EQ(b.code, 0) << b.out;
  const auto bj = nlohmann::json::parse(b.out);
  EXPECT_EQ(bj["failed"], 0);
  const std::string log = bj["log"];
  ASSERT_TRUE(fs::exists(log));

  // Same config again without --overwrite must refuse.
  EXPECT_EQ(Cli("bench --config '" + (tmp / "bench.json").string() + "'").code, 2);

  for (const char* fmt : {"md", "csv", "json"}) {
    const auto r = Cli("report --log '" + log + "' --format " + fmt);
    EXPECT_EQ(r.code, 0) << fmt;
    EXPECT_FALSE(r.out.empty()) << fmt;
  }
  for (int scenario : {0, 1, 2}) {
    const auto r = Cli("pareto --log '" + log + "' --scenario " + std::to_string(scenario));
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["scenario"], scenario);
    EXPECT_EQ(j["points"].size(), 6u);
  }
}

TEST(Cli, RuntimeFailuresExitTwo) {
  TempDir tmp;
  EXPECT_EQ(Cli("report --log '" + (tmp / "missing.jsonl").string() + "' --format md").code, 2);
  WriteFile(tmp / "empty.jsonl", "");
  EXPECT_EQ(Cli("report --log '" + (tmp / "empty.jsonl").string() + "' --format md").code, 2);
  EXPECT_EQ(Cli("pareto --log '" + (tmp / "missing.jsonl").string() + "' --scenario 1").code, 2);
  EXPECT_EQ(Cli("--data-dir '" + tmp.path().string() + "' prep census_income").code, 2);
  EXPECT_EQ(Cli("prep iris --data-dir '" + kData + "'").code, 2);
  WriteFile(tmp / "bad.json", "{\"treatments\": [\"noise\"]}");
  EXPECT_EQ(Cli("bench --config '" + (tmp / "bad.json").string() + "'").code, 2);
  // No powercap zones under an empty root.
  fs::create_directories(tmp / "rapl");
  EXPECT_EQ(Cli("--meter sysfs --data-dir '" + kData + "' prep census_income",
                "PET_RAPL_ROOT='" + (tmp / "rapl").string() + "'")
                .code,
            2);
}

TEST(Cli, SysfsMeterReadsFixtureTree) {
  TempDir tmp;
  const fs::path zone = tmp / "intel-rapl:0";
  WriteFile(zone / "name", "package-0\n");
  WriteFile(zone / "energy_uj", "1000\n");
  WriteFile(zone / "max_energy_range_uj", "262143328850\n");
  const auto r = Cli("--meter sysfs --data-dir '" + kData + "' prep census_income",
                     "PET_RAPL_ROOT='" + tmp.path().string() + "'");
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out)["energy"]["joules"].get<double>(), 0.0);
}

}  // namespace
