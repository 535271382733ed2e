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

#include "petbench/tradeoff.h"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "published_points.h"
#include "test_support.h"

namespace petbench {
namespace {

std::vector<TradeoffPoint> RandomPoints(std::mt19937_64& rng, std::size_t n) {
  // Coarse values so equal coordinates (and duplicate points) are common.
  std::uniform_int_distribution<int> j(0, 12), a(0, 10), p(0, 3);
  std::vector<TradeoffPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"d", "t" + std::to_string(i), "m", double(j(rng)), a(rng) / 10.0, double(p(rng))});
  }
  return out;
}

std::vector<bool> OracleMask(const std::vector<TradeoffPoint>& pts) {
  std::vector<bool> mask(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& q = pts[k];
      const auto& p = pts[i];
      const bool no_worse = q.joules <= p.joules && q.accuracy >= p.accuracy && q.privacy >= p.privacy;
      const bool strictly = q.joules < p.joules || q.accuracy > p.accuracy || q.privacy > p.privacy;
      if (no_worse && strictly) mask[i] = false;
    }
  }
  return mask;
}

TEST(Pareto, MatchesAllPairsOracle) {
  std::mt19937_64 rng(123);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = instance < 10 ? 1 + instance : 200;
    const auto pts = RandomPoints(rng, n);
    ASSERT_EQ(ParetoMask(pts), OracleMask(pts)) << "instance " << instance;
  }
}

TEST(Pareto, Examples) {
  std::vector<TradeoffPoint> one{{"d", "a", "m", 1, 0.5, 1}};
  EXPECT_EQ(ParetoFront(one), one);
  std::vector<TradeoffPoint> two{{"d", "good", "m", 1, 0.9, 2}, {"d", "bad", "m", 2, 0.8, 1}};
  EXPECT_TRUE(Dominates(two[0], two[1]));
  EXPECT_FALSE(Dominates(two[1], two[0]));
  EXPECT_FALSE(Dominates(two[0], two[0]));
  const auto front = ParetoFront(two);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].treatment, "good");
}

TEST(Pareto, InvariantUnderMonotoneRescaling) {
  std::mt19937_64 rng(9);
  for (int instance = 0; instance < 20; ++instance) {
    auto pts = RandomPoints(rng, 150);
    const auto mask = ParetoMask(pts);
    auto scaled = pts;
    for (auto& p : scaled) p.joules = std::exp(0.3 * p.joules) + 7.0;
    EXPECT_EQ(ParetoMask(scaled), mask);
    scaled = pts;
    for (auto& p : scaled) p.accuracy = p.accuracy * p.accuracy * p.accuracy;
    EXPECT_EQ(ParetoMask(scaled), mask);
  }
}

TEST(Pareto, EveryNonFrontPointIsDominatedByAFrontPoint) {
  std::mt19937_64 rng(10);
  const auto pts = RandomPoints(rng, 200);
  const auto mask = ParetoMask(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (mask[i]) continue;
    bool covered = false;
    for (std::size_t f = 0; f < pts.size(); ++f) covered = covered || (mask[f] && Dominates(pts[f], pts[i]));
    EXPECT_TRUE(covered) << i;
  }
}

TEST(Scenario, Presets) {
  const auto presets = ScenarioPresets();
  ASSERT_EQ(presets.size(), 3u);
  const auto& w0 = ScenarioPreset(0).weights;
  EXPECT_NEAR(w0.accuracy + w0.energy + w0.privacy, 1.0, 1e-15);
  EXPECT_EQ(ScenarioPreset(1).weights.accuracy, 1.0);
  EXPECT_EQ(ScenarioPreset(2).weights.energy, 1.0);
  EXPECT_PB_ERROR(ScenarioPreset(3), kPrecondition);
  EXPECT_PB_ERROR((ScenarioWeights{0, 0, 0}.Normalized()), kPrecondition);
  EXPECT_PB_ERROR((ScenarioWeights{-1, 1, 1}.Normalized()), kPrecondition);
}

TEST(Scenario, AccuracyOnlyRanksByAccuracy) {
  std::mt19937_64 rng(4);
  for (int instance = 0; instance < 20; ++instance) {
    const auto pts = RandomPoints(rng, 40);
    const auto ranked = ScenarioRank(pts, ScenarioPreset(1).weights);
    double best = 0;
    for (const auto& p : pts) best = std::max(best, p.accuracy);
    EXPECT_EQ(ranked.front().point.accuracy, best);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
      EXPECT_GE(ranked[i - 1].point.accuracy, ranked[i].point.accuracy);
      EXPECT_EQ(ranked[i].rank, static_cast<int>(i + 1));
    }
  }
}

TEST(Scenario, IdenticalPointsTieBreakByName) {
  std::vector<TradeoffPoint> pts{{"d", "synthetic", "nn", 5, 0.8, 3},
                                 {"d", "kanon:3", "knn", 5, 0.8, 3},
                                 {"d", "kanon:3", "logreg", 5, 0.8, 3}};
  const auto ranked = ScenarioRank(pts, ScenarioPreset(0).weights);
  for (const auto& r : ranked) EXPECT_EQ(r.score, 0.5);
  EXPECT_EQ(ranked[0].point.model, "knn");
  EXPECT_EQ(ranked[1].point.model, "logreg");
  EXPECT_EQ(ranked[2].point.treatment, "synthetic");
}

// Bob picks synthetic data and logistic regression.
TEST(Scenario, BobPrefersLogRegOnSyntheticStudentData) {
  std::vector<TradeoffPoint> synthetic;
  for (const auto& p : testing::PublishedPoints("student_performance")) {
    if (p.treatment == "synthetic") synthetic.push_back(p);
  }
  ASSERT_EQ(synthetic.size(), 3u);
  const auto ranked = ScenarioRank(synthetic, ScenarioPreset(2).weights);
  auto pos = [&](const std::string& model) {
    return std::find_if(ranked.begin(), ranked.end(), [&](const auto& r) { return r.point.model == model; })->rank;
  };
  EXPECT_LT(pos("logreg"), pos("nn"));
}

TEST(Scenario, EnergyPresetPutsKAnonFirstOnCensus) {
  const auto ranked = ScenarioRank(testing::PublishedPoints("census_income"), ScenarioPreset(2).weights);
  EXPECT_EQ(ranked.front().point.treatment.rfind("kanon:", 0), 0u);
}

RunRecord Rec(std::string treatment, std::string model, int rep, std::string_view phase, double joules,
              std::optional<double> acc = std::nullopt) {
  RunRecord r;
  r.dataset = "d";
  r.treatment = std::move(treatment);
  r.model = std::move(model);
  r.repetition = rep;
  r.phase = std::string(phase);
  r.joules_raw = joules;
  r.joules_adjusted = joules / 2;
  r.accuracy = acc;
  return r;
}

TEST(Collect, MeansOverRepetitions) {
  RunLog log{Rec("benchmark", "", 0, kPhasePrepare, 100),
             Rec("benchmark", "knn", 0, kPhaseTrain, 10), Rec("benchmark", "knn", 0, kPhaseEvaluate, 2, 0.8),
             Rec("benchmark", "knn", 1, kPhaseTrain, 20), Rec("benchmark", "knn", 1, kPhaseEvaluate, 4, 0.6),
             // rep 2 failed before evaluation: ignored
             Rec("benchmark", "knn", 2, kPhaseTrain, 1000)};
  const auto pts = CollectPoints(log, PrivacyScale::Default());
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_DOUBLE_EQ(pts[0].joules, 18.0);
  EXPECT_DOUBLE_EQ(pts[0].accuracy, 0.7);
  EXPECT_EQ(pts[0].privacy, 0.0);
  EXPECT_DOUBLE_EQ(CollectPoints(log, PrivacyScale::Default(), true)[0].joules, 9.0);

  EXPECT_PB_ERROR(CollectPoints(RunLog{}, PrivacyScale::Default()), kEmptyLog);
  RunLog unknown{Rec("kanon:5", "knn", 0, kPhaseEvaluate, 1, 0.5)};
  EXPECT_PB_ERROR(CollectPoints(unknown, PrivacyScale::Default()), kConfig);
}

TEST(PrivacyScale, Validation) {
  EXPECT_PB_ERROR(PrivacyScale::FromJson(nlohmann::json{{"benchmark", 2}, {"synthetic", 1}}), kConfig);
  EXPECT_PB_ERROR(PrivacyScale::FromJson(nlohmann::json{{"benchmark", "x"}}), kConfig);
  const auto s = PrivacyScale::FromJson(PrivacyScale::Default().ToJson());
  EXPECT_EQ(s.ranks(), PrivacyScale::Default().ranks());
}

}  // namespace
}  // namespace petbench
