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

#include "petbench/harness.h"

#include <set>

#include <gtest/gtest.h>

#include "petbench/report.h"
#include "test_support.h"

namespace petbench {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

const fs::path kFixtureData = fs::path(PETBENCH_TEST_FIXTURES) / "data";

ExperimentConfig SmallConfig(const fs::path& out) {
  ExperimentConfig c;
  c.datasets = {"census_income"};
  c.treatments = {"benchmark", "kanon:3", "synthetic"};
  c.models = {"knn", "logreg"};
  c.repetitions = 2;
  c.meter = "simulated";
  c.clock = "virtual";
  c.data_dir = kFixtureData;
  c.output_dir = out;
  c.logreg.epochs = 30;
  return c;
}

TEST(Treatment, ParseKeyDisplay) {
  EXPECT_EQ(Treatment::Parse("benchmark").DisplayName(), "Benchmark");
  EXPECT_EQ(Treatment::Parse("kanon:27").k, 27u);
  EXPECT_EQ(Treatment::Parse("kanon:27").DisplayName(), "k=27");
  EXPECT_EQ(Treatment::Parse("synthetic").Key(), "synthetic");
  EXPECT_PB_ERROR(Treatment::Parse("kanon:0"), kConfig);
  EXPECT_PB_ERROR(Treatment::Parse("kanon:x"), kConfig);
  EXPECT_PB_ERROR(Treatment::Parse("noise"), kConfig);
  EXPECT_TRUE(TreatmentLess("kanon:3", "kanon:10"));
  EXPECT_TRUE(TreatmentLess("benchmark", "kanon:3"));
  EXPECT_TRUE(TreatmentLess("kanon:27", "synthetic"));
}

TEST(Config, DefaultsMatchThePublishedGrid) {
  const ExperimentConfig c;
  EXPECT_EQ(c.repetitions, 10);
  EXPECT_EQ(c.treatments.size(), 5u);
  EXPECT_EQ(c.models.size(), 3u);
  EXPECT_EQ(c.alpha, 0.05);
}

TEST(Config, JsonRoundTripAndValidation) {
  auto c = SmallConfig("/tmp/x");
  c.max_rows = 100;
  const auto back = ExperimentConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_EQ(back.Hash(), c.Hash());

  auto bad = [](nlohmann::json j) { return ExperimentConfig::FromJson(j); };
  EXPECT_PB_ERROR(bad({{"mystery", 1}}), kConfig);
  EXPECT_PB_ERROR(bad({{"repetitions", 0}}), kConfig);
  EXPECT_PB_ERROR(bad({{"treatments", {"kanon:3"}}}), kConfig);
  EXPECT_PB_ERROR(bad({{"models", {"svm"}}}), kConfig);
  EXPECT_PB_ERROR(bad({{"clock", "virtual"}}), kConfig);  // needs the simulated meter
  EXPECT_PB_ERROR(bad({{"repetitions", "ten"}}), kConfig);
  EXPECT_EQ(bad({{"dataset", "student_performance"}}).datasets, std::vector<std::string>{"student_performance"});
}

TEST(Config, HashIgnoresOutputDirOnly) {
  auto a = SmallConfig("/tmp/a");
  auto b = SmallConfig("/tmp/b");
  EXPECT_EQ(a.Hash(), b.Hash());
  b.master_seed = 43;
  EXPECT_NE(a.Hash(), b.Hash());
  EXPECT_EQ(a.Hash().size(), 16u);
}

TEST(Config, LoadResolvesRelativePaths) {
  TempDir dir;
  testing::WriteFile(dir / "sub" / "cfg.json", R"({"data_dir": "data", "output_dir": "../runs"})");
  const auto c = ExperimentConfig::Load(dir / "sub" / "cfg.json");
  EXPECT_EQ(c.data_dir, dir / "sub" / "data");
  EXPECT_EQ(c.output_dir, dir / "runs");
  EXPECT_PB_ERROR(ExperimentConfig::Load(dir / "missing.json"), kIoError);
}

TEST(Seeds, DeriveSeedIsStableAndSpreads) {
  EXPECT_EQ(DeriveSeed(42, {1, 2, 3}), DeriveSeed(42, {1, 2, 3}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 10; ++a) {
    for (std::uint64_t b = 0; b < 10; ++b) seen.insert(DeriveSeed(42, {a, b}));
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(DeriveSeed(42, {1, 2}), DeriveSeed(42, {2, 1}));
}

TEST(Run, GridArithmeticSingleCell) {
  TempDir dir;
  auto c = SmallConfig(dir.path());
  c.treatments = {"benchmark"};
  c.models = {"logreg"};
  const auto log = RunExperiment(c);
  std::size_t evaluate = 0;
  for (const auto& r : log) {
    EXPECT_TRUE(r.ok()) << r.error;
    EXPECT_EQ(r.accuracy.has_value(), r.phase == kPhaseEvaluate);
    evaluate += r.phase == kPhaseEvaluate;
  }
  EXPECT_EQ(evaluate, 2u);
  EXPECT_EQ(ReadRunLog(c.LogPath()), log);
}

TEST(Run, DeterministicUnderVirtualClock) {
  TempDir a, b;
  const auto la = RunExperiment(SmallConfig(a.path()));
  const auto lb = RunExperiment(SmallConfig(b.path()));
  EXPECT_EQ(testing::ReadFile(a / "run_log.jsonl"), testing::ReadFile(b / "run_log.jsonl"));
  EXPECT_EQ(RenderJson(BuildReport(la)), RenderJson(BuildReport(lb)));
  EXPECT_EQ(RenderMarkdown(BuildReport(la)), RenderMarkdown(BuildReport(lb)));
}

TEST(Run, RecordsCoverTheGridAndShareTheTestSet) {
  TempDir dir;
  const auto c = SmallConfig(dir.path());
  const auto log = RunExperiment(c);
  std::set<std::tuple<std::string, std::string, int, std::string>> cells;
  std::set<std::size_t> eval_totals;
  for (const auto& r : log) {
    EXPECT_TRUE(r.ok()) << r.treatment << " " << r.model << " " << r.phase << ": " << r.error;
    EXPECT_EQ(r.config_hash, c.Hash());
    EXPECT_GE(r.duration_s, 0.0);
    EXPECT_GE(r.joules_raw, r.joules_adjusted);
    cells.insert({r.treatment, r.model, r.repetition, r.phase});
    if (r.phase == kPhaseEvaluate) eval_totals.insert(r.extra.at("total").get<std::size_t>());
  }
  // prepare + treat per (treatment, rep); train + evaluate per (treatment, model, rep).
  EXPECT_EQ(cells.size(), 3u * 2 * 2 + 3u * 2 * 2 * 2);
  EXPECT_EQ(eval_totals.size(), 1u);
}

TEST(Run, RefusesToOverwriteWithoutFlag) {
  TempDir dir;
  auto c = SmallConfig(dir.path());
  c.treatments = {"benchmark"};
  c.models = {"logreg"};
  c.repetitions = 1;
  RunExperiment(c);
  EXPECT_PB_ERROR(RunExperiment(c), kPrecondition);
  RunOptions opts;
  opts.overwrite = true;
  const auto again = RunExperiment(c, opts);
  EXPECT_EQ(ReadRunLog(c.LogPath()).size(), again.size());
}

TEST(Run, FailingCellIsRecordedAndGridContinues) {
  TempDir dir;
  auto c = SmallConfig(dir.path());
  c.neighbours = 100000;  // more neighbours than training rows
  c.repetitions = 1;
  const auto log = RunExperiment(c);
  bool knn_error = false, knn_skipped = false, logreg_ok = false;
  for (const auto& r : log) {
    if (r.model == "knn" && r.phase == kPhaseTrain) knn_error = knn_error || r.status == "error";
    if (r.model == "knn" && r.phase == kPhaseEvaluate) knn_skipped = knn_skipped || r.status == "skipped";
    if (r.model == "logreg" && r.phase == kPhaseEvaluate) logreg_ok = logreg_ok || r.ok();
  }
  EXPECT_TRUE(knn_error);
  EXPECT_TRUE(knn_skipped);
  EXPECT_TRUE(logreg_ok);
}

TEST(Run, StudentLayoutRunsEveryTreatment) {
  TempDir dir;
  auto c = SmallConfig(dir.path());
  c.datasets = {"student_performance"};
  c.treatments = {"benchmark", "kanon:3", "kanon:10", "kanon:27", "synthetic"};
  c.models = {"knn", "logreg", "nn"};
  c.repetitions = 1;
  for (const auto& r : RunExperiment(c)) {
    EXPECT_TRUE(r.ok()) << r.treatment << " " << r.model << " " << r.phase << ": " << r.error;
  }
}

TEST(Run, MissingDataIsRecordedNotThrown) {
  TempDir dir;
  auto c = SmallConfig(dir / "out");
  c.data_dir = dir / "empty";
  c.repetitions = 1;
  const auto log = RunExperiment(c);
  ASSERT_FALSE(log.empty());
  EXPECT_EQ(log.front().phase, kPhasePrepare);
  EXPECT_EQ(log.front().status, "error");
  EXPECT_NE(log.front().error.find("petbench fetch"), std::string::npos);
}

}  // namespace
}  // namespace petbench
