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

#include "petbench/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "petbench/error.h"
#include "petbench/synthesis.h"

namespace petbench {

std::string_view AlternativeName(Alternative a) {
  switch (a) {
    case Alternative::kTwoSided: return "two-sided";
    case Alternative::kGreater: return "greater";
    case Alternative::kLess: return "less";
  }
  return "?";
}

std::string_view UMethodName(UMethod m) {
  switch (m) {
    case UMethod::kAuto: return "auto";
    case UMethod::kExact: return "exact";
    case UMethod::kNormalApprox: return "normal";
  }
  return "?";
}

namespace {

struct Ranked {
  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  bool ties = false;
};

Ranked RankPooled(std::span<const double> a, std::span<const double> b) {
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(a.size() + b.size());
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  Ranked r;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i + 1);
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t q = i; q <= j; ++q)
      if (pooled[q].second) r.rank_sum_a += midrank;
    if (t > 1.0) {
      r.ties = true;
      r.tie_term += t * t * t - t;
    }
    i = j + 1;
  }
  return r;
}

void CheckNonEmpty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptySample, "both samples must be nonempty");
}

double PGreaterExact(double u, std::size_t n1, std::size_t n2) {
  const auto counts = UNullCounts(n1, n2);
  const auto lo = static_cast<std::size_t>(std::ceil(u));
  double tail = 0.0;
  for (std::size_t k = lo; k < counts.size(); ++k) tail += counts[k];
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  return tail / total;
}

double PGreaterNormal(double u, std::size_t n1, std::size_t n2, double tie_term) {
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const double n = dn1 + dn2;
  const double mean = dn1 * dn2 / 2.0;
  double var = dn1 * dn2 / 12.0 * (n + 1.0);
  if (n > 1.0) var -= dn1 * dn2 / 12.0 * tie_term / (n * (n - 1.0));
  if (var <= 0.0) return 1.0;
  const double z = (u - mean - 0.5) / std::sqrt(var);
  return std::clamp(1.0 - NormalCdf(z), 0.0, 1.0);
}

// p for "a greater than b" plus bookkeeping.
UTestResult Greater(std::span<const double> a, std::span<const double> b, UMethod method) {
  const Ranked r = RankPooled(a, b);
  const std::size_t n1 = a.size(), n2 = b.size();
  const double dn1 = static_cast<double>(n1);
  UTestResult out;
  out.n1 = n1;
  out.n2 = n2;
  out.ties = r.ties;
  out.u = r.rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  const bool eligible = !r.ties && n1 <= kMaxExactSize && n2 <= kMaxExactSize;
  if (method == UMethod::kExact) {
    if (r.ties) throw Error(ErrorCode::kTiesInExact, "exact method needs untied samples");
    if (!eligible) {
      throw Error(ErrorCode::kPrecondition,
                  "exact method supports sample sizes up to " + std::to_string(kMaxExactSize));
    }
  }
  out.method = (method == UMethod::kAuto) ? (eligible ? UMethod::kExact : UMethod::kNormalApprox) : method;
  out.p_value = out.method == UMethod::kExact ? PGreaterExact(out.u, n1, n2)
                                              : PGreaterNormal(out.u, n1, n2, r.tie_term);
  out.alternative = Alternative::kGreater;
  return out;
}

}  // namespace

std::pair<double, double> UStatistic(std::span<const double> a, std::span<const double> b) {
  CheckNonEmpty(a, b);
  const Ranked r = RankPooled(a, b);
  const double dn1 = static_cast<double>(a.size());
  const double ua = r.rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  return {ua, dn1 * static_cast<double>(b.size()) - ua};
}

std::vector<double> UNullCounts(std::size_t n1, std::size_t n2) {
  // f[i][j][u]: orderings of i a-values and j b-values with U = u. The
  // largest value is either an a (adds j to U) or a b.
  const std::size_t max_u = n1 * n2;
  std::vector<std::vector<std::vector<double>>> f(
      n1 + 1, std::vector<std::vector<double>>(n2 + 1));
  for (std::size_t i = 0; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      auto& cell = f[i][j];
      cell.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        cell[0] = 1.0;
        continue;
      }
      const auto& with_a = f[i - 1][j];
      const auto& with_b = f[i][j - 1];
      for (std::size_t u = 0; u < with_a.size(); ++u) cell[u + j] += with_a[u];
      for (std::size_t u = 0; u < with_b.size(); ++u) cell[u] += with_b[u];
    }
  }
  auto out = std::move(f[n1][n2]);
  out.resize(max_u + 1, 0.0);
  return out;
}

UTestResult MannWhitney(std::span<const double> a, std::span<const double> b, Alternative alternative,
                        UMethod method) {
  CheckNonEmpty(a, b);
  UTestResult out;
  switch (alternative) {
    case Alternative::kGreater:
      out = Greater(a, b, method);
      break;
    case Alternative::kLess: {
      const UTestResult swapped = Greater(b, a, method);
      out = swapped;
      out.n1 = a.size();
      out.n2 = b.size();
      out.u = static_cast<double>(a.size() * b.size()) - swapped.u;
      break;
    }
    case Alternative::kTwoSided: {
      const UTestResult g = Greater(a, b, method);
      const UTestResult l = Greater(b, a, method);
      out = g;
      out.p_value = std::min(1.0, 2.0 * std::min(g.p_value, l.p_value));
      break;
    }
  }
  out.alternative = alternative;
  return out;
}

PValueMatrix PairwiseMatrix(const std::vector<LabeledSample>& groups, Alternative alternative,
                            UMethod method) {
  if (groups.size() < 2) throw Error(ErrorCode::kPrecondition, "pairwise matrix needs at least 2 groups");
  PValueMatrix m;
  const std::size_t n = groups.size();
  m.p.assign(n, std::vector<std::optional<double>>(n));
  m.method.assign(n, std::vector<std::optional<UMethod>>(n));
  for (const auto& g : groups) m.labels.push_back(g.label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto r = MannWhitney(groups[i].values, groups[j].values, alternative, method);
      m.p[i][j] = r.p_value;
      m.method[i][j] = r.method;
    }
  }
  return m;
}

nlohmann::json UTestResult::ToJson() const {
  return {{"u", u},   {"p_value", p_value}, {"method", UMethodName(method)},
          {"alternative", AlternativeName(alternative)}, {"n1", n1}, {"n2", n2}, {"ties", ties}};
}

}  // namespace petbench
