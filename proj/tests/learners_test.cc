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

#include "petbench/learners.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixture_tables.h"
#include "test_support.h"

namespace petbench {
namespace {

struct Problem {
  RowMatrix x;
  Labels y;
};

Problem RandomProblem(std::mt19937_64& rng, std::size_t n, std::size_t d, bool grid) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cell(0, 3);
  Problem p;
  p.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.x.cols(); ++j) p.x(i, j) = grid ? cell(rng) / 4.0 : unit(rng);
    p.y.push_back(unit(rng) < 0.5 ? 1 : 0);
  }
  return p;
}

// Independent knn: full sort of (distance, index) pairs.
int BruteKnn(const Problem& train, const Eigen::RowVectorXd& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (Eigen::Index i = 0; i < train.x.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < train.x.cols(); ++j) {
      const double diff = train.x(i, j) - q(j);
      s += diff * diff;
    }
    d.emplace_back(s, static_cast<std::size_t>(i));
  }
  std::sort(d.begin(), d.end());
  int votes = 0;
  for (std::size_t j = 0; j < k; ++j) votes += train.y[d[j].second] ? 1 : -1;
  if (votes == 0) return train.y[d[0].second];
  return votes > 0 ? 1 : 0;
}

TEST(Knn, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> rows(1, 200), dims(1, 10);
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = rows(rng), d = dims(rng);
    // Half the instances sit on a quarter grid: exact distances, many ties.
    const bool grid = instance % 2 == 0;
    const auto train = RandomProblem(rng, n, d, grid);
    const auto test = RandomProblem(rng, 20, d, grid);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n, 9))(rng);
    const auto model = KnnModel::Fit(train.x, train.y, k);
    const auto pred = model.Predict(test.x);
    for (Eigen::Index q = 0; q < test.x.rows(); ++q) {
      ASSERT_EQ(pred[static_cast<std::size_t>(q)], BruteKnn(train, test.x.row(q), k))
          << "instance " << instance << " query " << q;
    }
  }
}

TEST(Knn, Preconditions) {
  std::mt19937_64 rng(1);
  const auto p = RandomProblem(rng, 5, 2, false);
  EXPECT_PB_ERROR(KnnModel::Fit(p.x, p.y, 0), kPrecondition);
  EXPECT_PB_ERROR(KnnModel::Fit(p.x, p.y, 6), kPrecondition);
  const auto m = KnnModel::Fit(p.x, p.y, 1);
  EXPECT_PB_ERROR(m.Predict(RowMatrix::Zero(1, 3)), kDimensionMismatch);
  // With one neighbour each training row predicts its own label.
  EXPECT_EQ(m.Predict(p.x), p.y);
}

double RelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

Eigen::VectorXd Flatten(const LogRegModel& m) {
  Eigen::VectorXd v(m.weights.size() + 1);
  v << m.weights, m.bias;
  return v;
}

LogRegModel Unflatten(const Eigen::VectorXd& v) {
  LogRegModel m;
  m.weights = v.head(v.size() - 1);
  m.bias = v(v.size() - 1);
  return m;
}

Eigen::VectorXd Flatten(const NnModel& m) {
  const auto w1 = m.hidden_weights.reshaped();
  Eigen::VectorXd v(w1.size() + m.hidden_bias.size() + m.output_weights.size() + 1);
  v << w1, m.hidden_bias, m.output_weights, m.output_bias;
  return v;
}

NnModel Unflatten(const Eigen::VectorXd& v, const NnModel& shape) {
  NnModel m = shape;
  Eigen::Index at = 0;
  const auto w1 = m.hidden_weights.size();
  m.hidden_weights = v.segment(at, w1).reshaped(m.hidden_weights.rows(), m.hidden_weights.cols());
  at += w1;
  m.hidden_bias = v.segment(at, m.hidden_bias.size());
  at += m.hidden_bias.size();
  m.output_weights = v.segment(at, m.output_weights.size());
  at += m.output_weights.size();
  m.output_bias = v(at);
  return m;
}

template <typename Loss>
Eigen::VectorXd CentralDifference(const Eigen::VectorXd& theta, Loss loss, double h) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    g(i) = (loss(up) - loss(down)) / (2 * h);
  }
  return g;
}

TEST(LogReg, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int instance = 0; instance < 20; ++instance) {
    const auto p = RandomProblem(rng, 30 + instance, 1 + instance % 7, false);
    LogRegModel m;
    m.weights = Eigen::VectorXd::NullaryExpr(p.x.cols(), [&] { return normal(rng); });
    m.bias = normal(rng);
    const double l2 = instance % 2 ? 0.1 : 0.0;
    LogRegModel grad;
    LogRegLoss(m, p.x, p.y, l2, &grad);
    auto loss = [&](const Eigen::VectorXd& t) { return LogRegLoss(Unflatten(t), p.x, p.y, l2); };
    const auto fd = CentralDifference(Flatten(m), loss, 1e-6);
    EXPECT_LT(RelativeError(Flatten(grad), fd), 1e-4) << "instance " << instance;
  }
}

TEST(Nn, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (int instance = 0; instance < 20; ++instance) {
    const auto p = RandomProblem(rng, 25, 1 + instance % 5, false);
    const auto m = InitNn(static_cast<std::size_t>(p.x.cols()), 3 + instance % 6, 100 + instance);
    const double l2 = instance % 2 ? 0.05 : 0.0;
    NnModel grad;
    NnLoss(m, p.x, p.y, l2, &grad);
    auto loss = [&](const Eigen::VectorXd& t) { return NnLoss(Unflatten(t, m), p.x, p.y, l2); };
    const auto fd = CentralDifference(Flatten(m), loss, 1e-6);
    EXPECT_LT(RelativeError(Flatten(grad), fd), 1e-4) << "instance " << instance;
  }
}

TEST(LogReg, ZeroModelAndBias) {
  RowMatrix x = RowMatrix::Random(4, 3);
  LogRegModel m;
  m.weights = Eigen::VectorXd::Zero(3);
  EXPECT_TRUE((m.PredictProba(x).array() == 0.5).all());
  EXPECT_EQ(m.Predict(x), (Labels{1, 1, 1, 1}));
  m.bias = 50.0;
  EXPECT_EQ(m.Predict(x), (Labels{1, 1, 1, 1}));
  m.bias = 0.0;
  m.weights = Eigen::VectorXd::Zero(1);
  m.weights(0) = 2.0;
  RowMatrix one(5, 1);
  one << -2, -1, 0, 1, 2;
  const auto p = m.PredictProba(one);
  for (int i = 1; i < 5; ++i) EXPECT_GT(p(i), p(i - 1));
}

TEST(Training, DeterministicAndLossDecreases) {
  const auto table = testing::MixedFixture(600, 21);
  AttributeSchema schema({{"age", ColumnKind::kNumeric, AttributeRole::kInsensitive, false, {}, {}},
                          {"job", ColumnKind::kCategorical, AttributeRole::kInsensitive, false, {}, {}},
                          {"income", ColumnKind::kNumeric, AttributeRole::kInsensitive, false, {}, {}},
                          {"region", ColumnKind::kCategorical, AttributeRole::kInsensitive, false, {}, {}},
                          {"label", ColumnKind::kCategorical, AttributeRole::kInsensitive, true, {}, "high"}});
  const auto m = Encode(table, schema);

  TrainTrace t1, t2;
  const auto a = TrainLogReg(m.features, m.labels, DefaultLogRegConfig(), &t1);
  const auto b = TrainLogReg(m.features, m.labels, DefaultLogRegConfig(), &t2);
  EXPECT_EQ(Flatten(a), Flatten(b));
  ASSERT_GE(t1.losses.size(), 2u);
  EXPECT_LT(t1.losses[1], t1.losses[0]);
  for (double l : t1.losses) EXPECT_GE(l, 0.0);
  EXPECT_GT(Accuracy(a.Predict(m.features), m.labels).accuracy, 0.7);

  auto cfg = DefaultNnConfig();
  cfg.seed = 5;
  cfg.learning_rate = 0.1;  // few rows, so few steps at the default rate
  TrainTrace n1, n2;
  const auto na = TrainNn(m.features, m.labels, cfg, 16, &n1);
  const auto nb = TrainNn(m.features, m.labels, cfg, 16, &n2);
  EXPECT_EQ(Flatten(na), Flatten(nb));
  ASSERT_GE(n1.losses.size(), 2u);
  EXPECT_LT(n1.losses[1], n1.losses[0]);
  EXPECT_TRUE(Flatten(na).allFinite());
  EXPECT_GT(Accuracy(na.Predict(m.features), m.labels).accuracy, 0.7);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_PB_ERROR(c.Validate(), kPrecondition);
  c.learning_rate = 0.1;
  c.epochs = 0;
  EXPECT_PB_ERROR(c.Validate(), kPrecondition);
}

TEST(Accuracy, ExactRatioAndPermutationInvariance) {
  Labels pred{1, 0, 1, 1, 0, 0, 1}, lab{1, 1, 1, 0, 0, 0, 0};
  const auto r = Accuracy(pred, lab);
  EXPECT_EQ(r.correct, 4u);
  EXPECT_EQ(r.total, 7u);
  EXPECT_EQ(r.accuracy, 4.0 / 7.0);
  std::vector<std::size_t> perm(pred.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Labels p2, l2;
    for (auto j : perm) {
      p2.push_back(pred[j]);
      l2.push_back(lab[j]);
    }
    EXPECT_EQ(Accuracy(p2, l2).accuracy, r.accuracy);
  }
  EXPECT_PB_ERROR(Accuracy(Labels{1}, Labels{1, 0}), kLengthMismatch);
  EXPECT_PB_ERROR(Accuracy(Labels{}, Labels{}), kEmptyInput);
}

}  // namespace
}  // namespace petbench
