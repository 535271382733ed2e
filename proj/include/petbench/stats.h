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

#ifndef PETBENCH_STATS_H_
#define PETBENCH_STATS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace petbench {

enum class Alternative { kTwoSided, kGreater, kLess };
enum class UMethod { kAuto, kExact, kNormalApprox };

std::string_view AlternativeName(Alternative a);
std::string_view UMethodName(UMethod m);

// Largest per-sample size the exact method accepts.
inline constexpr std::size_t kMaxExactSize = 20;

struct UTestResult {
  double u = 0.0;  // U of the first sample
  double p_value = 1.0;
  UMethod method = UMethod::kExact;
  Alternative alternative = Alternative::kTwoSided;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool ties = false;

  nlohmann::json ToJson() const;
};

// Midrank U for each sample. U_a counts pairs with a > b, ties as one half.
std::pair<double, double> UStatistic(std::span<const double> a, std::span<const double> b);

// Greater asks whether values of `a` tend to exceed values of `b`.
UTestResult MannWhitney(std::span<const double> a, std::span<const double> b, Alternative alternative,
                        UMethod method = UMethod::kAuto);

// Number of orderings of n1 + n2 untied values whose U_a equals u, for
// u = 0..n1*n2. Counts are exact in double up to n1 = n2 = 20.
std::vector<double> UNullCounts(std::size_t n1, std::size_t n2);

struct LabeledSample {
  std::string label;
  std::vector<double> values;
};

struct PValueMatrix {
  std::vector<std::string> labels;
  // p[i][j] is empty on the diagonal.
  std::vector<std::vector<std::optional<double>>> p;
  std::vector<std::vector<std::optional<UMethod>>> method;
};

// Entry (i, j) tests group i against group j with `alternative`.
PValueMatrix PairwiseMatrix(const std::vector<LabeledSample>& groups,
                            Alternative alternative = Alternative::kGreater,
                            UMethod method = UMethod::kAuto);

}  // namespace petbench

#endif  // PETBENCH_STATS_H_
