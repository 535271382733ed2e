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

#ifndef PETBENCH_TRADEOFF_H_
#define PETBENCH_TRADEOFF_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "petbench/run_log.h"

namespace petbench {

struct TradeoffPoint {
  std::string dataset;
  std::string treatment;
  std::string model;
  double joules = 0.0;
  double accuracy = 0.0;
  double privacy = 0.0;  // ordinal rank

  nlohmann::json ToJson() const;
  friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

// Treatment key ("benchmark", "kanon:10", "synthetic") to ordinal privacy.
class PrivacyScale {
 public:
  // benchmark 0, kanon:3 1, kanon:10 2, kanon:27 3, synthetic 3.
  static PrivacyScale Default();
  static PrivacyScale FromJson(const nlohmann::json& j);

  PrivacyScale() = default;
  explicit PrivacyScale(std::map<std::string, double> ranks);

  // Throws kConfig for treatments missing from the scale.
  double Rank(const std::string& treatment) const;
  const std::map<std::string, double>& ranks() const { return ranks_; }
  nlohmann::json ToJson() const;

 private:
  std::map<std::string, double> ranks_;
};

struct ScenarioWeights {
  double accuracy = 1.0 / 3.0;
  double energy = 1.0 / 3.0;
  double privacy = 1.0 / 3.0;

  // Throws kPrecondition on negative or all-zero weights.
  ScenarioWeights Normalized() const;
  nlohmann::json ToJson() const;
};

struct NamedScenario {
  int id = 0;
  std::string name;
  ScenarioWeights weights;
};

// 0: all dimensions, 1: accuracy, 2: energy.
std::vector<NamedScenario> ScenarioPresets();
const NamedScenario& ScenarioPreset(int id);

// Means over repetitions of train+evaluate joules and evaluate accuracy,
// one point per (dataset, treatment, model). Throws kEmptyLog.
std::vector<TradeoffPoint> CollectPoints(std::span<const RunRecord> log, const PrivacyScale& scale,
                                         bool adjusted_joules = false);

// p dominates q: joules <=, accuracy >=, privacy >=, at least one strict.
bool Dominates(const TradeoffPoint& p, const TradeoffPoint& q);

// mask[i] is true when points[i] is on the front.
std::vector<bool> ParetoMask(std::span<const TradeoffPoint> points);
std::vector<TradeoffPoint> ParetoFront(std::span<const TradeoffPoint> points);

struct RankedPoint {
  TradeoffPoint point;
  double score = 0.0;
  int rank = 0;  // 1-based
  bool on_front = false;

  nlohmann::json ToJson() const;
};

std::vector<RankedPoint> ScenarioRank(std::span<const TradeoffPoint> points, const ScenarioWeights& weights);

}  // namespace petbench

#endif  // PETBENCH_TRADEOFF_H_
