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
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "test_support.h"

namespace petbench {
namespace {

double PairCount(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
  }
  return u;
}

// Enumerates every way to pick which n1 of the pooled values belong to the
// first sample; returns {P(U <= u), P(U >= u)}.
std::pair<double, double> EnumeratedTails(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), n1 = a.size();
  const double u = PairCount(a, b);
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
  double total = 0, le = 0, ge = 0;
  do {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? x : y).push_back(pooled[i]);
    const double v = PairCount(x, y);
    total += 1;
    le += v <= u ? 1 : 0;
    ge += v >= u ? 1 : 0;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return {le / total, ge / total};
}

std::vector<double> Distinct(std::mt19937_64& rng, std::size_t n, double shift = 0.0) {
  std::normal_distribution<double> normal(shift, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

TEST(UStatistic, Examples) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  auto [ua, ub] = UStatistic(a, b);
  EXPECT_EQ(ua, 0.0);
  EXPECT_EQ(ub, 9.0);
  std::vector<double> c{1, 2, 2, 3};
  auto [uc, ud] = UStatistic(c, c);
  EXPECT_EQ(uc, 8.0);
  EXPECT_EQ(ud, 8.0);
  std::vector<double> empty;
  EXPECT_PB_ERROR(UStatistic(empty, a), kEmptySample);
}

TEST(UStatistic, MatchesPairCountingWithTies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(0, 4);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(6), b(6);
    for (auto& x : a) x = small(rng);
    for (auto& x : b) x = small(rng);
    auto [ua, ub] = UStatistic(a, b);
    EXPECT_EQ(ua, PairCount(a, b));
    EXPECT_EQ(ua + ub, 36.0);
  }
}

TEST(MannWhitney, ThreeVersusThree) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto r = MannWhitney(a, b, Alternative::kLess, UMethod::kExact);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 20.0);
  EXPECT_EQ(r.method, UMethod::kExact);
  const auto same = MannWhitney(a, a, Alternative::kTwoSided);
  EXPECT_EQ(same.p_value, 1.0);
}

TEST(MannWhitney, ExactMatchesEnumerationUpToEight) {
  std::mt19937_64 rng(99);
  for (std::size_t n1 = 1; n1 <= 8; ++n1) {
    for (std::size_t n2 = 1; n2 <= 8; ++n2) {
      for (int rep = 0; rep < 3; ++rep) {
        const auto a = Distinct(rng, n1, 0.3 * rep);
        const auto b = Distinct(rng, n2);
        const auto [le, ge] = EnumeratedTails(a, b);
        const auto less = MannWhitney(a, b, Alternative::kLess, UMethod::kExact);
        const auto greater = MannWhitney(a, b, Alternative::kGreater, UMethod::kExact);
        const auto two = MannWhitney(a, b, Alternative::kTwoSided, UMethod::kExact);
        ASSERT_NEAR(less.p_value, le, 1e-12) << n1 << "x" << n2;
        ASSERT_NEAR(greater.p_value, ge, 1e-12) << n1 << "x" << n2;
        ASSERT_NEAR(two.p_value, std::min(1.0, 2 * std::min(le, ge)), 1e-12) << n1 << "x" << n2;
      }
    }
  }
}

TEST(MannWhitney, NullCountsSumToBinomial) {
  for (std::size_t n1 = 1; n1 <= 12; ++n1) {
    for (std::size_t n2 = 1; n2 <= 12; ++n2) {
      const auto counts = UNullCounts(n1, n2);
      ASSERT_EQ(counts.size(), n1 * n2 + 1);
      double binom = 1;
      for (std::size_t i = 1; i <= n1; ++i) binom = binom * static_cast<double>(n2 + i) / static_cast<double>(i);
      EXPECT_NEAR(std::accumulate(counts.begin(), counts.end(), 0.0), binom, 1e-6 * binom);
      for (std::size_t u = 0; u <= n1 * n2; ++u) EXPECT_EQ(counts[u], counts[n1 * n2 - u]);
    }
  }
}

TEST(MannWhitney, NormalApproxCloseToExactAtFifteen) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = Distinct(rng, 15, 0.05 * rep);
    const auto b = Distinct(rng, 15);
    for (auto alt : {Alternative::kLess, Alternative::kGreater, Alternative::kTwoSided}) {
      const double exact = MannWhitney(a, b, alt, UMethod::kExact).p_value;
      const double approx = MannWhitney(a, b, alt, UMethod::kNormalApprox).p_value;
      EXPECT_NEAR(approx, exact, 0.01) << "rep " << rep << " " << AlternativeName(alt);
    }
  }
}

TEST(MannWhitney, DirectionDualityIsExact) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> small(0, 5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(3 + rep % 20), b(2 + rep % 17);
    for (auto& x : a) x = rep % 2 ? small(rng) : std::normal_distribution<double>()(rng);
    for (auto& x : b) x = rep % 2 ? small(rng) : std::normal_distribution<double>()(rng);
    for (auto method : {UMethod::kAuto, UMethod::kNormalApprox}) {
      EXPECT_EQ(MannWhitney(a, b, Alternative::kGreater, method).p_value,
                MannWhitney(b, a, Alternative::kLess, method).p_value);
    }
  }
}

TEST(MannWhitney, InvariantsAndShiftMonotonicity) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    auto a = Distinct(rng, 4 + rep % 25);
    const auto b = Distinct(rng, 3 + rep % 19);
    double previous = 2.0;
    for (int step = 0; step < 6; ++step) {
      const auto r = MannWhitney(a, b, Alternative::kGreater);
      EXPECT_GE(r.u, 0.0);
      EXPECT_LE(r.u, static_cast<double>(a.size() * b.size()));
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
      EXPECT_LE(r.p_value, previous);
      previous = r.p_value;
      for (auto& x : a) x += 0.25;
    }
  }
}

TEST(MannWhitney, MethodSelectionAndErrors) {
  std::vector<double> tied{1, 2, 2}, other{3, 4, 5};
  EXPECT_PB_ERROR(MannWhitney(tied, other, Alternative::kLess, UMethod::kExact), kTiesInExact);
  const auto auto_tied = MannWhitney(tied, other, Alternative::kLess);
  EXPECT_EQ(auto_tied.method, UMethod::kNormalApprox);
  EXPECT_TRUE(auto_tied.ties);
  std::vector<double> big(21);
  std::iota(big.begin(), big.end(), 0.5);
  EXPECT_PB_ERROR(MannWhitney(big, other, Alternative::kLess, UMethod::kExact), kPrecondition);
  EXPECT_EQ(MannWhitney(big, other, Alternative::kLess).method, UMethod::kNormalApprox);
  std::vector<double> empty;
  EXPECT_PB_ERROR(MannWhitney(empty, other, Alternative::kLess), kEmptySample);
}

TEST(Pairwise, SeparatedGroupsAndAntisymmetry) {
  std::mt19937_64 rng(77);
  std::vector<LabeledSample> groups{{"A", Distinct(rng, 10, 0.0)}, {"B", Distinct(rng, 10, 10.0)},
                                    {"C", Distinct(rng, 10, 5.0)}};
  const auto m = PairwiseMatrix(groups);
  ASSERT_EQ(m.labels, (std::vector<std::string>{"A", "B", "C"}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_FALSE(m.p[i][i].has_value());
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      EXPECT_EQ(*m.p[i][j],
                MannWhitney(groups[j].values, groups[i].values, Alternative::kLess).p_value);
    }
  }
  EXPECT_GT(*m.p[0][1], 0.95);  // A greater than B: no
  EXPECT_LT(*m.p[1][0], 0.05);  // B greater than A: yes
  EXPECT_PB_ERROR(PairwiseMatrix({groups[0]}), kPrecondition);
}

TEST(Pairwise, DuplicatedGroupIsNotSignificant) {
  std::mt19937_64 rng(78);
  const auto v = Distinct(rng, 10);
  const auto m = PairwiseMatrix({{"x", v}, {"y", v}});
  EXPECT_GT(*m.p[0][1], 0.05);
  EXPECT_LT(*m.p[0][1], 0.95);
}

}  // namespace
}  // namespace petbench
