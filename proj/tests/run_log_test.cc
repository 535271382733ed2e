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

#include <gtest/gtest.h>

#include "test_support.h"

namespace petbench {
namespace {

using testing::TempDir;

RunRecord Sample() {
  RunRecord r;
  r.dataset = "census_income";
  r.treatment = "kanon:3";
  r.model = "knn";
  r.repetition = 4;
  r.phase = std::string(kPhaseEvaluate);
  r.duration_s = 1.25;
  r.joules_raw = 9.39;
  r.joules_adjusted = 0.0;
  r.accuracy = 0.8125;
  r.t_start = 10.0;
  r.t_end = 11.25;
  r.config_hash = "abc";
  r.extra = {{"correct", 13}, {"total", 16}};
  return r;
}

TEST(RunRecord, JsonRoundTrip) {
  const auto r = Sample();
  EXPECT_EQ(RunRecord::FromJson(r.ToJson()), r);
  EXPECT_EQ(r.ToJson().at("rep"), 4);
  auto no_acc = r;
  no_acc.phase = std::string(kPhaseTrain);
  no_acc.accuracy.reset();
  EXPECT_FALSE(no_acc.ToJson().contains("accuracy"));
  EXPECT_EQ(RunRecord::FromJson(no_acc.ToJson()), no_acc);
}

TEST(RunLog, AppendThenReadBack) {
  TempDir dir;
  const auto path = dir / "nested" / "run_log.jsonl";
  RunLogWriter w(path);
  auto a = Sample();
  auto b = Sample();
  b.status = "error";
  b.error = "boom";
  b.accuracy.reset();
  w.Append(a);
  w.Append(b);
  const auto log = ReadRunLog(path);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0], a);
  EXPECT_EQ(log[1], b);
  EXPECT_FALSE(log[1].ok());
  // One JSON object per line.
  const auto text = testing::ReadFile(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(RunLog, Errors) {
  EXPECT_PB_ERROR(ReadRunLog("/nonexistent/run_log.jsonl"), kIoError);
  const std::string good = Sample().ToJson().dump();
  try {
    ParseRunLog(good + "\n{not json\n");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(ParseRunLog(good + "\n\n" + good + "\n").size(), 2u);
}

}  // namespace
}  // namespace petbench
