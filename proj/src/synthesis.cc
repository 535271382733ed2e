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

#include "petbench/synthesis.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "petbench/error.h"

namespace petbench {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation followed by one Halley step.
double NormalQuantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = NormalCdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double MarginalModel::NumericAt(double u) const {
  if (quantiles.empty()) return 0.0;
  if (quantiles.size() == 1) return quantiles.front();
  u = std::clamp(u, 0.0, 1.0);
  const double pos = u * static_cast<double>(quantiles.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= quantiles.size()) return quantiles.back();
  const double frac = pos - static_cast<double>(lo);
  return quantiles[lo] + frac * (quantiles[lo + 1] - quantiles[lo]);
}

std::size_t MarginalModel::CategoryAt(double u) const {
  double cum = 0.0;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    cum += frequencies[i];
    if (u < cum) return i;
  }
  return frequencies.empty() ? 0 : frequencies.size() - 1;
}

namespace {

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> MidRanks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

Eigen::MatrixXd PearsonMatrix(const std::vector<std::vector<double>>& columns) {
  const std::size_t m = columns.size();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  if (m == 0) return corr;
  const std::size_t n = columns.front().size();
  std::vector<std::vector<double>> centered(m);
  std::vector<double> norm(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    const double mean = std::accumulate(columns[c].begin(), columns[c].end(), 0.0) / static_cast<double>(n);
    centered[c].resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      centered[c][r] = columns[c][r] - mean;
      norm[c] += centered[c][r] * centered[c][r];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double v = 0.0;
      if (norm[i] > 0.0 && norm[j] > 0.0) {
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += centered[i][r] * centered[j][r];
        v = std::clamp(dot / std::sqrt(norm[i] * norm[j]), -1.0, 1.0);
      }
      corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return corr;
}

// Correlation between a standard normal latent and its discretised score,
// taking each distinct score value as one cell of the latent's range.
double AttenuationFactor(const std::vector<double>& score) {
  const std::size_t n = score.size();
  if (n == 0) return 1.0;
  std::map<double, double> freq;
  for (double v : score) freq[v] += 1.0 / static_cast<double>(n);
  if (freq.size() < 2) return 1.0;
  auto density = [](double z) { return std::isfinite(z) ? std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) : 0.0; };
  double cum = 0.0, mean = 0.0, second = 0.0, cross = 0.0;
  for (const auto& [value, p] : freq) {
    const double lo = cum <= 0.0 ? -INFINITY : NormalQuantile(cum);
    cum += p;
    const double hi = cum >= 1.0 - 1e-12 ? INFINITY : NormalQuantile(cum);
    cross += value * (density(lo) - density(hi));
    mean += p * value;
    second += p * value * value;
  }
  const double var = second - mean * mean;
  if (var <= 0.0) return 1.0;
  return std::clamp(cross / std::sqrt(var), 1e-6, 1.0);
}

// Category position in `order` as a double, for rank-based statistics.
// Categories absent from `order` follow it by name.
std::vector<double> OrderedCategoryValues(const Column& col, std::span<const std::size_t> rows,
                                          const std::vector<std::string>& order) {
  std::vector<std::string> rest;
  for (const auto& c : col.categories())
    if (std::find(order.begin(), order.end(), c) == order.end()) rest.push_back(c);
  std::sort(rest.begin(), rest.end());
  std::vector<std::string> full = order;
  full.insert(full.end(), rest.begin(), rest.end());
  std::vector<double> rank_of(col.categories().size());
  for (std::size_t d = 0; d < col.categories().size(); ++d) {
    rank_of[d] = static_cast<double>(std::find(full.begin(), full.end(), col.categories()[d]) - full.begin());
  }
  std::vector<double> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(rank_of[static_cast<std::size_t>(col.code(r))]);
  return out;
}

}  // namespace

Eigen::MatrixXd RepairCorrelation(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd psd = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd scale(psd.rows());
  for (Eigen::Index i = 0; i < psd.rows(); ++i) {
    scale(i) = psd(i, i) > 0.0 ? 1.0 / std::sqrt(psd(i, i)) : 0.0;
  }
  Eigen::MatrixXd out = scale.asDiagonal() * psd * scale.asDiagonal();
  out = 0.5 * (out + out.transpose());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, i) = 1.0;
  return out;
}

CopulaModel FitCopula(const DataTable& table, const SynthesisOptions& options) {
  const auto rows = table.RowsWithoutMissing();
  if (rows.size() < 2) {
    throw Error(ErrorCode::kDegenerateTable, "copula fit needs at least 2 complete rows, got " +
                                                 std::to_string(rows.size()));
  }
  const std::size_t n = rows.size();
  CopulaModel model;
  std::vector<std::vector<double>> scores;
  // Per categorical column: dictionary code to partition slot.
  std::vector<std::vector<std::size_t>> slot_of_code(table.cols());
  std::vector<std::vector<double>> freq_of_code(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const Column& col = table.column(c);
    MarginalModel mm;
    mm.column = col.name();
    mm.kind = col.kind();
    std::vector<double> score(n);
    if (col.kind() == ColumnKind::kNumeric) {
      std::vector<double> values;
      values.reserve(n);
      for (auto r : rows) values.push_back(col.number(r));
      const auto ranks = MidRanks(values);
      for (std::size_t i = 0; i < n; ++i) score[i] = NormalQuantile(ranks[i] / static_cast<double>(n + 1));
      std::sort(values.begin(), values.end());
      const std::size_t m = std::min(std::max<std::size_t>(options.max_quantiles, 2), n);
      mm.quantiles.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double pos = static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(m - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        mm.quantiles[j] = lo + 1 < n ? values[lo] + frac * (values[lo + 1] - values[lo]) : values[lo];
      }
    } else {
      auto& freq = freq_of_code[c];
      freq.assign(col.categories().size(), 0.0);
      for (auto r : rows) freq[static_cast<std::size_t>(col.code(r))] += 1.0 / static_cast<double>(n);
      std::vector<std::size_t> codes;
      for (std::size_t d = 0; d < freq.size(); ++d)
        if (freq[d] > 0.0) codes.push_back(d);
      std::sort(codes.begin(), codes.end(),
                [&](auto a, auto b) { return col.categories()[a] < col.categories()[b]; });
      slot_of_code[c].assign(freq.size(), 0);
      for (std::size_t i = 0; i < codes.size(); ++i) {
        slot_of_code[c][codes[i]] = i;
        mm.categories.push_back(col.categories()[codes[i]]);
        mm.frequencies.push_back(freq[codes[i]]);
      }
    }
    model.columns.push_back(col.name());
    model.marginals.push_back(std::move(mm));
    scores.push_back(std::move(score));
  }

  auto categorical_scores = [&](std::size_t c) {
    const Column& col = table.column(c);
    const auto& mm = model.marginals[c];
    std::vector<double> mid(mm.frequencies.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < mid.size(); ++i) {
      mid[i] = NormalQuantile(cum + mm.frequencies[i] / 2.0);
      cum += mm.frequencies[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      scores[c][i] = mid[slot_of_code[c][static_cast<std::size_t>(col.code(rows[i]))]];
    }
  };
  for (std::size_t c = 0; c < table.cols(); ++c)
    if (table.column(c).kind() == ColumnKind::kCategorical) categorical_scores(c);

  // Discretised scores understate the latent correlation; divide it back out.
  auto latent_correlation = [&]() {
    Eigen::MatrixXd corr = PearsonMatrix(scores);
    std::vector<double> factor;
    for (const auto& sc : scores) factor.push_back(AttenuationFactor(sc));
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
      for (Eigen::Index j = 0; j < corr.cols(); ++j) {
        if (i == j) continue;
        corr(i, j) = std::clamp(corr(i, j) / (factor[static_cast<std::size_t>(i)] * factor[static_cast<std::size_t>(j)]),
                                -1.0, 1.0);
      }
    }
    return RepairCorrelation(corr);
  };

  for (int pass = 0; pass < options.category_order_passes; ++pass) {
    const Eigen::MatrixXd corr = latent_correlation();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    const Eigen::VectorXd lead = eig.eigenvectors().col(corr.cols() - 1);
    std::vector<double> composite(n, 0.0);
    for (std::size_t c = 0; c < scores.size(); ++c)
      for (std::size_t i = 0; i < n; ++i) composite[i] += lead(static_cast<Eigen::Index>(c)) * scores[c][i];
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const Column& col = table.column(c);
      if (col.kind() != ColumnKind::kCategorical) continue;
      const double w = lead(static_cast<Eigen::Index>(c));
      std::vector<double> sum(col.categories().size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        sum[static_cast<std::size_t>(col.code(rows[i]))] += composite[i] - w * scores[c][i];
      }
      std::vector<std::size_t> codes;
      for (std::size_t d = 0; d < sum.size(); ++d)
        if (freq_of_code[c][d] > 0.0) codes.push_back(d);
      auto mean = [&](std::size_t d) { return sum[d] / freq_of_code[c][d]; };
      std::stable_sort(codes.begin(), codes.end(), [&](auto a, auto b) {
        return std::pair(mean(a), col.categories()[a]) < std::pair(mean(b), col.categories()[b]);
      });
      auto& mm = model.marginals[c];
      mm.categories.clear();
      mm.frequencies.clear();
      for (std::size_t i = 0; i < codes.size(); ++i) {
        slot_of_code[c][codes[i]] = i;
        mm.categories.push_back(col.categories()[codes[i]]);
        mm.frequencies.push_back(freq_of_code[c][codes[i]]);
      }
      categorical_scores(c);
    }
  }
  model.correlation = latent_correlation();
  return model;
}

DataTable SampleCopula(const CopulaModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kPrecondition, "sample size must be >= 1");
  const auto m = static_cast<Eigen::Index>(model.columns.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.correlation);
  const Eigen::MatrixXd factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), m);
  Eigen::VectorXd eps(m);
  for (std::size_t r = 0; r < n; ++r) {
    for (Eigen::Index j = 0; j < m; ++j) eps(j) = normal(rng);
    const Eigen::VectorXd z = factor * eps;
    for (Eigen::Index j = 0; j < m; ++j) u(static_cast<Eigen::Index>(r), j) = NormalCdf(z(j));
  }

  std::vector<Column> cols;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& mm = model.marginals[static_cast<std::size_t>(j)];
    if (mm.kind == ColumnKind::kNumeric) {
      std::vector<double> values(n);
      for (std::size_t r = 0; r < n; ++r) values[r] = mm.NumericAt(u(static_cast<Eigen::Index>(r), j));
      cols.push_back(Column::Numeric(mm.column, std::move(values)));
    } else {
      std::vector<std::string> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        values[r] = mm.categories[mm.CategoryAt(u(static_cast<Eigen::Index>(r), j))];
      }
      cols.push_back(Column::Categorical(mm.column, values));
    }
  }
  return DataTable(std::move(cols));
}

nlohmann::json CopulaModel::ToJson() const {
  nlohmann::json out;
  out["columns"] = columns;
  auto margs = nlohmann::json::array();
  for (const auto& mm : marginals) {
    nlohmann::json j = {{"column", mm.column}, {"kind", std::string(KindName(mm.kind))}};
    if (mm.kind == ColumnKind::kNumeric) {
      j["quantiles"] = mm.quantiles;
    } else {
      j["categories"] = mm.categories;
      j["frequencies"] = mm.frequencies;
    }
    margs.push_back(std::move(j));
  }
  out["marginals"] = std::move(margs);
  auto corr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < correlation.cols(); ++j) row.push_back(correlation(i, j));
    corr.push_back(row);
  }
  out["correlation"] = std::move(corr);
  return out;
}

CopulaModel CopulaModel::FromJson(const nlohmann::json& j) {
  CopulaModel model;
  model.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& mj : j.at("marginals")) {
    MarginalModel mm;
    mm.column = mj.at("column").get<std::string>();
    mm.kind = ParseKind(mj.at("kind").get<std::string>());
    if (mm.kind == ColumnKind::kNumeric) {
      mm.quantiles = mj.at("quantiles").get<std::vector<double>>();
    } else {
      mm.categories = mj.at("categories").get<std::vector<std::string>>();
      mm.frequencies = mj.at("frequencies").get<std::vector<double>>();
    }
    model.marginals.push_back(std::move(mm));
  }
  const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
  const auto m = static_cast<Eigen::Index>(rows.size());
  model.correlation.resize(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != m) {
      throw Error(ErrorCode::kConfig, "correlation matrix is not square");
    }
    for (Eigen::Index c = 0; c < m; ++c) model.correlation(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  if (model.columns.size() != model.marginals.size() || static_cast<std::size_t>(m) != model.columns.size()) {
    throw Error(ErrorCode::kConfig, "copula model dimensions disagree");
  }
  return model;
}

Eigen::MatrixXd SpearmanMatrix(const DataTable& table, const CategoryOrder& order) {
  const auto rows = table.RowsWithoutMissing();
  std::vector<std::vector<double>> ranks;
  for (const auto& col : table.columns()) {
    std::vector<double> values;
    if (col.kind() == ColumnKind::kNumeric) {
      for (auto r : rows) values.push_back(col.number(r));
    } else {
      auto it = order.find(col.name());
      values = OrderedCategoryValues(col, rows, it == order.end() ? std::vector<std::string>{} : it->second);
    }
    ranks.push_back(MidRanks(values));
  }
  return PearsonMatrix(ranks);
}

namespace {

double Quantile(std::vector<double> sorted_values, double p) {
  if (sorted_values.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted_values.size()) return sorted_values.back();
  return sorted_values[lo] + (pos - static_cast<double>(lo)) * (sorted_values[lo + 1] - sorted_values[lo]);
}

}  // namespace

UtilityReport CompareUtility(const DataTable& original, const DataTable& synthetic) {
  if (original.cols() != synthetic.cols()) {
    throw Error(ErrorCode::kSchemaMismatch, "column counts differ");
  }
  for (std::size_t c = 0; c < original.cols(); ++c) {
    if (original.column(c).name() != synthetic.column(c).name() ||
        original.column(c).kind() != synthetic.column(c).kind()) {
      throw Error(ErrorCode::kSchemaMismatch, "column " + std::to_string(c) + " differs");
    }
  }
  UtilityReport report;
  for (std::size_t c = 0; c < original.cols(); ++c) {
    const Column& a = original.column(c);
    const Column& b = synthetic.column(c);
    double distance = 0.0;
    if (a.kind() == ColumnKind::kCategorical) {
      std::map<std::string, double> pa, pb;
      for (std::size_t r = 0; r < a.size(); ++r) pa[a.label(r)] += 1.0 / static_cast<double>(a.size());
      for (std::size_t r = 0; r < b.size(); ++r) pb[b.label(r)] += 1.0 / static_cast<double>(b.size());
      std::map<std::string, double> diff;
      for (const auto& [k, v] : pa) diff[k] += v;
      for (const auto& [k, v] : pb) diff[k] -= v;
      for (const auto& [k, v] : diff) distance += std::fabs(v);
      distance /= 2.0;
    } else {
      std::vector<double> va, vb;
      for (std::size_t r = 0; r < a.size(); ++r) if (!a.missing(r)) va.push_back(a.number(r));
      for (std::size_t r = 0; r < b.size(); ++r) if (!b.missing(r)) vb.push_back(b.number(r));
      std::sort(va.begin(), va.end());
      std::sort(vb.begin(), vb.end());
      const double range = va.empty() ? 0.0 : va.back() - va.front();
      if (range > 0.0 && !vb.empty()) {
        for (int d = 1; d <= 9; ++d) {
          const double p = d / 10.0;
          distance = std::max(distance, std::fabs(Quantile(va, p) - Quantile(vb, p)) / range);
        }
      }
    }
    report.column_distance[a.name()] = std::clamp(distance, 0.0, 1.0);
  }

  if (original.rows() >= 2 && synthetic.rows() >= 2) {
    CategoryOrder order;
    if (original.RowsWithoutMissing().size() >= 2) {
      const CopulaModel fitted = FitCopula(original);
      for (const auto& mm : fitted.marginals)
        if (mm.kind == ColumnKind::kCategorical) order[mm.column] = mm.categories;
    }
    const Eigen::MatrixXd so = SpearmanMatrix(original, order);
    const Eigen::MatrixXd ss = SpearmanMatrix(synthetic, order);
    report.spearman_max_deviation = std::min(1.0, (so - ss).cwiseAbs().maxCoeff());
  }

  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < original.rows(); ++r) seen.insert(original.RowText(r, '\x1f'));
  std::size_t matches = 0;
  for (std::size_t r = 0; r < synthetic.rows(); ++r) matches += seen.count(synthetic.RowText(r, '\x1f'));
  report.exact_match_rate =
      synthetic.rows() ? static_cast<double>(matches) / static_cast<double>(synthetic.rows()) : 0.0;
  return report;
}

nlohmann::json UtilityReport::ToJson() const {
  return {{"column_distance", column_distance},
          {"spearman_max_deviation", spearman_max_deviation},
          {"exact_match_rate", exact_match_rate}};
}

}  // namespace petbench
