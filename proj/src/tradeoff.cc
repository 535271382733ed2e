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
#include <numeric>
#include <tuple>

#include "petbench/error.h"

namespace petbench {

PrivacyScale PrivacyScale::Default() {
  return PrivacyScale({{"benchmark", 0.0}, {"kanon:3", 1.0}, {"kanon:10", 2.0}, {"kanon:27", 3.0}, {"synthetic", 3.0}});
}

PrivacyScale::PrivacyScale(std::map<std::string, double> ranks) : ranks_(std::move(ranks)) {
  for (const auto& [name, rank] : ranks_) {
    if (!(rank >= 0.0)) throw Error(ErrorCode::kConfig, "privacy rank of " + name + " must be >= 0");
  }
  if (auto it = ranks_.find("benchmark"); it != ranks_.end()) {
    for (const auto& [name, rank] : ranks_) {
      if (rank < it->second) throw Error(ErrorCode::kConfig, "benchmark must hold the lowest privacy rank");
    }
  }
}

PrivacyScale PrivacyScale::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "privacy scale must be an object");
  std::map<std::string, double> ranks;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(ErrorCode::kConfig, "privacy rank of " + k + " must be a number");
    ranks[k] = v.get<double>();
  }
  return PrivacyScale(std::move(ranks));
}

double PrivacyScale::Rank(const std::string& treatment) const {
  auto it = ranks_.find(treatment);
  if (it == ranks_.end()) throw Error(ErrorCode::kConfig, "no privacy rank for treatment " + treatment);
  return it->second;
}

nlohmann::json PrivacyScale::ToJson() const { return nlohmann::json(ranks_); }

ScenarioWeights ScenarioWeights::Normalized() const {
  if (accuracy < 0.0 || energy < 0.0 || privacy < 0.0) {
    throw Error(ErrorCode::kPrecondition, "scenario weights must be >= 0");
  }
  const double sum = accuracy + energy + privacy;
  if (!(sum > 0.0)) throw Error(ErrorCode::kPrecondition, "scenario weights are all zero");
  return {accuracy / sum, energy / sum, privacy / sum};
}

nlohmann::json ScenarioWeights::ToJson() const {
  return {{"accuracy", accuracy}, {"energy", energy}, {"privacy", privacy}};
}

std::vector<NamedScenario> ScenarioPresets() {
  return {{0, "optimise all dimensions", {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
          {1, "optimise for accuracy", {1.0, 0.0, 0.0}},
          {2, "optimise for energy", {0.0, 1.0, 0.0}}};
}

const NamedScenario& ScenarioPreset(int id) {
  static const std::vector<NamedScenario> presets = ScenarioPresets();
  for (const auto& p : presets)
    if (p.id == id) return p;
  throw Error(ErrorCode::kPrecondition, "unknown scenario " + std::to_string(id));
}

std::vector<TradeoffPoint> CollectPoints(std::span<const RunRecord> log, const PrivacyScale& scale,
                                         bool adjusted_joules) {
  using Key = std::tuple<std::string, std::string, std::string>;
  struct Acc {
    std::map<int, double> joules;  // per repetition
    std::map<int, double> accuracy;
  };
  std::map<Key, Acc> cells;
  std::vector<Key> order;
  for (const auto& r : log) {
    if (!r.ok() || r.model.empty()) continue;
    if (r.phase != kPhaseTrain && r.phase != kPhaseEvaluate) continue;
    Key key{r.dataset, r.treatment, r.model};
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.joules[r.repetition] += adjusted_joules ? r.joules_adjusted : r.joules_raw;
    if (r.phase == kPhaseEvaluate && r.accuracy) it->second.accuracy[r.repetition] = *r.accuracy;
  }
  std::vector<TradeoffPoint> out;
  for (const auto& key : order) {
    const auto& acc = cells.at(key);
    if (acc.accuracy.empty()) continue;
    double j = 0.0, a = 0.0;
    std::size_t nj = 0;
    for (const auto& [rep, value] : acc.joules) {
      // Only repetitions that reached evaluation count.
      if (!acc.accuracy.contains(rep)) continue;
      j += value;
      ++nj;
    }
    for (const auto& [rep, value] : acc.accuracy) a += value;
    TradeoffPoint p;
    std::tie(p.dataset, p.treatment, p.model) = key;
    p.joules = j / static_cast<double>(nj);
    p.accuracy = a / static_cast<double>(acc.accuracy.size());
    p.privacy = scale.Rank(p.treatment);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyLog, "log has no evaluate records");
  return out;
}

bool Dominates(const TradeoffPoint& p, const TradeoffPoint& q) {
  const bool no_worse = p.joules <= q.joules && p.accuracy >= q.accuracy && p.privacy >= q.privacy;
  const bool better = p.joules < q.joules || p.accuracy > q.accuracy || p.privacy > q.privacy;
  return no_worse && better;
}

std::vector<bool> ParetoMask(std::span<const TradeoffPoint> points) {
  // After this sort a point can only be dominated by one placed before it.
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& p = points[a];
    const auto& q = points[b];
    return std::tuple(p.joules, -p.accuracy, -p.privacy, a) < std::tuple(q.joules, -q.accuracy, -q.privacy, b);
  });
  std::vector<bool> mask(points.size(), false);
  std::vector<std::size_t> front;
  for (std::size_t i : idx) {
    const bool dominated =
        std::any_of(front.begin(), front.end(), [&](std::size_t f) { return Dominates(points[f], points[i]); });
    if (!dominated) {
      mask[i] = true;
      front.push_back(i);
    }
  }
  return mask;
}

std::vector<TradeoffPoint> ParetoFront(std::span<const TradeoffPoint> points) {
  const auto mask = ParetoMask(points);
  std::vector<TradeoffPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (mask[i]) out.push_back(points[i]);
  return out;
}

namespace {

std::vector<double> MinMax(std::span<const TradeoffPoint> points, double TradeoffPoint::*field, bool invert) {
  double lo = points.front().*field, hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.*field);
    hi = std::max(hi, p.*field);
  }
  std::vector<double> out;
  for (const auto& p : points) {
    if (hi == lo) {
      out.push_back(0.5);
      continue;
    }
    const double t = (p.*field - lo) / (hi - lo);
    out.push_back(invert ? 1.0 - t : t);
  }
  return out;
}

}  // namespace

std::vector<RankedPoint> ScenarioRank(std::span<const TradeoffPoint> points, const ScenarioWeights& weights) {
  if (points.empty()) return {};
  const ScenarioWeights w = weights.Normalized();
  const auto acc = MinMax(points, &TradeoffPoint::accuracy, false);
  const auto energy = MinMax(points, &TradeoffPoint::joules, true);
  const auto priv = MinMax(points, &TradeoffPoint::privacy, false);
  const auto mask = ParetoMask(points);
  std::vector<RankedPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    RankedPoint r;
    r.point = points[i];
    r.score = w.accuracy * acc[i] + w.energy * energy[i] + w.privacy * priv[i];
    r.on_front = mask[i];
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedPoint& a, const RankedPoint& b) {
    const auto& p = a.point;
    const auto& q = b.point;
    return std::tuple(-a.score, -p.accuracy, p.joules, p.treatment, p.model, p.dataset) <
           std::tuple(-b.score, -q.accuracy, q.joules, q.treatment, q.model, q.dataset);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

nlohmann::json TradeoffPoint::ToJson() const {
  return {{"dataset", dataset}, {"treatment", treatment}, {"model", model},
          {"joules", joules},   {"accuracy", accuracy},   {"privacy", privacy}};
}

nlohmann::json RankedPoint::ToJson() const {
  auto j = point.ToJson();
  j["score"] = score;
  j["rank"] = rank;
  j["on_front"] = on_front;
  return j;
}

}  // namespace petbench
