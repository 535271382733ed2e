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

#ifndef PETBENCH_SYNTHESIS_H_
#define PETBENCH_SYNTHESIS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "petbench/data_core.h"

namespace petbench {

// Empirical marginal of one column.
struct MarginalModel {
  std::string column;
  ColumnKind kind = ColumnKind::kCategorical;
  // Categorical: categories in partition order and their frequencies (sum 1).
  std::vector<std::string> categories;
  std::vector<double> frequencies;
  // Numeric: values at evenly spaced probabilities 0..1, non-decreasing.
  std::vector<double> quantiles;

  // Inverse CDF at u in [0, 1].
  double NumericAt(double u) const;
  std::size_t CategoryAt(double u) const;
};

// Gaussian copula over empirical marginals.
struct CopulaModel {
  std::vector<std::string> columns;
  std::vector<MarginalModel> marginals;
  Eigen::MatrixXd correlation;  // symmetric PSD, unit diagonal

  nlohmann::json ToJson() const;
  static CopulaModel FromJson(const nlohmann::json& j);
};

struct SynthesisOptions {
  // Upper bound on stored quantile points per numeric column.
  std::size_t max_quantiles = 2001;
  // Passes that reorder each categorical partition by the mean leading
  // component score of the other columns. 0 keeps lexical order.
  int category_order_passes = 3;
};

// Throws kDegenerateTable with fewer than two rows. Rows holding a missing
// marker are ignored.
CopulaModel FitCopula(const DataTable& table, const SynthesisOptions& options = {});

// Deterministic in (model, n, seed). Throws kPrecondition when n == 0.
DataTable SampleCopula(const CopulaModel& model, std::size_t n, std::uint64_t seed);

struct UtilityReport {
  // Total-variation distance for categorical columns, normalized max
  // decile deviation for numeric ones.
  std::map<std::string, double> column_distance;
  double spearman_max_deviation = 0.0;
  double exact_match_rate = 0.0;

  nlohmann::json ToJson() const;
};

// Throws kSchemaMismatch when the column lists differ. Categorical columns
// enter the Spearman comparison in the partition order a copula fitted on
// `original` would use.
UtilityReport CompareUtility(const DataTable& original, const DataTable& synthetic);

// Column name to category order.
using CategoryOrder = std::map<std::string, std::vector<std::string>>;

// Spearman rank correlation matrix. Categorical columns are ranked by their
// position in `order`, falling back to category name.
Eigen::MatrixXd SpearmanMatrix(const DataTable& table, const CategoryOrder& order = {});

// Nearest correlation-like matrix: eigenvalues clipped at 0, diagonal rescaled to 1.
Eigen::MatrixXd RepairCorrelation(const Eigen::MatrixXd& m);

double NormalCdf(double x);
double NormalQuantile(double p);

}  // namespace petbench

#endif  // PETBENCH_SYNTHESIS_H_
