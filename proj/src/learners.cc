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
#include <string>

#include "petbench/error.h"

namespace petbench {

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kPrecondition, "learning rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::kPrecondition, "epochs must be >= 1");
  if (l2 < 0.0) throw Error(ErrorCode::kPrecondition, "l2 must be >= 0");
}

TrainConfig DefaultLogRegConfig() { return {1.0, 300, 0, 0, 0.0}; }
TrainConfig DefaultNnConfig() { return {0.01, 50, 32, 0, 0.0}; }

EvalResult Accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                                std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "accuracy of zero predictions");
  EvalResult r;
  r.total = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) r.correct += predictions[i] == labels[i] ? 1 : 0;
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

Labels Threshold(const Eigen::VectorXd& probabilities) {
  Labels out(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    out[static_cast<std::size_t>(i)] = probabilities(i) >= 0.5 ? 1 : 0;
  }
  return out;
}

namespace {

// log(1 + e^z) without overflow.
double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void CheckLabels(const RowMatrix& x, std::span<const int> y) {
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "feature rows and labels differ in length");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::kNonBinaryLabels, "label " + std::to_string(v));
  }
}

Eigen::VectorXd LabelVector(std::span<const int> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

double MeanLogLoss(const Eigen::VectorXd& logits, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) total += Softplus(logits(i)) - y(i) * logits(i);
  return total / static_cast<double>(logits.size());
}

RowMatrix GatherRows(const RowMatrix& x, std::span<const std::size_t> rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

// Visits mini-batches of a freshly shuffled order (or the whole set).
template <typename Fn>
void ForEachBatch(std::size_t n, std::size_t batch_size, std::mt19937_64& rng, Fn&& fn) {
  if (batch_size == 0 || batch_size >= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    fn(std::span<const std::size_t>(all), true);
    return;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t len = std::min(batch_size, n - start);
    fn(std::span<const std::size_t>(order.data() + start, len), false);
  }
}

}  // namespace

EvalResult Evaluate(const Eigen::VectorXd& probabilities, std::span<const int> labels) {
  const Labels pred = Threshold(probabilities);
  EvalResult r = Accuracy(pred, labels);
  constexpr double kEps = 1e-15;
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities(static_cast<Eigen::Index>(i)), kEps, 1.0 - kEps);
    loss -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  r.mean_log_loss = loss / static_cast<double>(labels.size());
  return r;
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

KnnModel KnnModel::Fit(RowMatrix features, Labels labels, std::size_t neighbours) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "feature rows and labels differ in length");
  }
  if (neighbours < 1 || neighbours > labels.size()) {
    throw Error(ErrorCode::kPrecondition, "neighbour count " + std::to_string(neighbours) +
                                              " with " + std::to_string(labels.size()) + " rows");
  }
  KnnModel m;
  m.features_ = std::move(features);
  m.labels_ = std::move(labels);
  m.neighbours_ = neighbours;
  return m;
}

Labels KnnModel::Predict(const RowMatrix& queries) const {
  if (queries.cols() != features_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "query width " + std::to_string(queries.cols()) +
                                                   " vs " + std::to_string(features_.cols()));
  }
  const auto n = static_cast<std::size_t>(features_.rows());
  const std::size_t k = neighbours_;
  Labels out(static_cast<std::size_t>(queries.rows()));
  std::vector<double> dist(n);
  std::vector<std::size_t> idx(n);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const auto query = queries.row(q);
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = (features_.row(static_cast<Eigen::Index>(i)) - query).squaredNorm();
    }
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), closer);
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), closer);
    std::size_t ones = 0;
    for (std::size_t j = 0; j < k; ++j) ones += labels_[idx[j]] == 1 ? 1 : 0;
    const std::size_t zeros = k - ones;
    out[static_cast<std::size_t>(q)] = ones > zeros ? 1 : ones < zeros ? 0 : labels_[idx[0]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logistic regression

Eigen::VectorXd LogRegModel::PredictProba(const RowMatrix& x) const {
  if (x.cols() != weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(weights.size()) +
                                                   " features, got " + std::to_string(x.cols()));
  }
  Eigen::VectorXd z = (x * weights).array() + bias;
  return z.unaryExpr([](double v) { return Sigmoid(v); });
}

nlohmann::json LogRegModel::ToJson() const {
  return {{"type", "logreg"},
          {"weights", std::vector<double>(weights.data(), weights.data() + weights.size())},
          {"bias", bias}};
}

double LogRegLoss(const LogRegModel& model, const RowMatrix& x, std::span<const int> y, double l2,
                  LogRegModel* gradient) {
  const Eigen::VectorXd yv = LabelVector(y);
  const Eigen::VectorXd z = (x * model.weights).array() + model.bias;
  const double loss = MeanLogLoss(z, yv) + 0.5 * l2 * model.weights.squaredNorm();
  if (gradient) {
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    const Eigen::VectorXd dz = (z.unaryExpr([](double v) { return Sigmoid(v); }) - yv) * inv_n;
    gradient->weights = x.transpose() * dz + l2 * model.weights;
    gradient->bias = dz.sum();
  }
  return loss;
}

LogRegModel TrainLogReg(const RowMatrix& x, std::span<const int> y, const TrainConfig& config,
                        TrainTrace* trace) {
  config.Validate();
  CheckLabels(x, y);
  LogRegModel model;
  model.weights = Eigen::VectorXd::Zero(x.cols());
  std::mt19937_64 rng(config.seed);
  if (trace) trace->losses = {LogRegLoss(model, x, y, config.l2)};
  LogRegModel grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    ForEachBatch(static_cast<std::size_t>(x.rows()), config.batch_size, rng,
                 [&](std::span<const std::size_t> rows, bool full) {
                   if (full) {
                     LogRegLoss(model, x, y, config.l2, &grad);
                   } else {
                     Labels yb;
                     for (auto r : rows) yb.push_back(y[r]);
                     LogRegLoss(model, GatherRows(x, rows), yb, config.l2, &grad);
                   }
                   model.weights -= config.learning_rate * grad.weights;
                   model.bias -= config.learning_rate * grad.bias;
                 });
    if (trace) trace->losses.push_back(LogRegLoss(model, x, y, config.l2));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Feedforward network

Eigen::VectorXd NnModel::PredictProba(const RowMatrix& x) const {
  if (x.cols() != hidden_weights.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(hidden_weights.rows()) +
                                                   " features, got " + std::to_string(x.cols()));
  }
  Eigen::MatrixXd h = (x * hidden_weights).rowwise() + hidden_bias.transpose();
  h = h.cwiseMax(0.0);
  Eigen::VectorXd z = (h * output_weights).array() + output_bias;
  return z.unaryExpr([](double v) { return Sigmoid(v); });
}

nlohmann::json NnModel::ToJson() const {
  std::vector<std::vector<double>> w1;
  for (Eigen::Index i = 0; i < hidden_weights.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < hidden_weights.cols(); ++j) row.push_back(hidden_weights(i, j));
    w1.push_back(std::move(row));
  }
  return {{"type", "nn"},
          {"hidden_weights", w1},
          {"hidden_bias", std::vector<double>(hidden_bias.data(), hidden_bias.data() + hidden_bias.size())},
          {"output_weights",
           std::vector<double>(output_weights.data(), output_weights.data() + output_weights.size())},
          {"output_bias", output_bias}};
}

double NnLoss(const NnModel& model, const RowMatrix& x, std::span<const int> y, double l2,
              NnModel* gradient) {
  const Eigen::VectorXd yv = LabelVector(y);
  const Eigen::MatrixXd pre = (x * model.hidden_weights).rowwise() + model.hidden_bias.transpose();
  const Eigen::MatrixXd h = pre.cwiseMax(0.0);
  const Eigen::VectorXd z = (h * model.output_weights).array() + model.output_bias;
  const double loss = MeanLogLoss(z, yv) +
                      0.5 * l2 * (model.hidden_weights.squaredNorm() + model.output_weights.squaredNorm());
  if (gradient) {
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    const Eigen::VectorXd dz = (z.unaryExpr([](double v) { return Sigmoid(v); }) - yv) * inv_n;
    gradient->output_weights = h.transpose() * dz + l2 * model.output_weights;
    gradient->output_bias = dz.sum();
    Eigen::MatrixXd dh = dz * model.output_weights.transpose();
    dh = dh.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    gradient->hidden_weights = x.transpose() * dh + l2 * model.hidden_weights;
    gradient->hidden_bias = dh.colwise().sum().transpose();
  }
  return loss;
}

NnModel InitNn(std::size_t features, std::size_t hidden_width, std::uint64_t seed) {
  if (hidden_width == 0) throw Error(ErrorCode::kPrecondition, "hidden width must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NnModel m;
  const auto f = static_cast<Eigen::Index>(features);
  const auto h = static_cast<Eigen::Index>(hidden_width);
  const double s1 = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(features, 1)));
  const double s2 = std::sqrt(1.0 / static_cast<double>(hidden_width));
  m.hidden_weights.resize(f, h);
  for (Eigen::Index i = 0; i < f; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) m.hidden_weights(i, j) = s1 * normal(rng);
  }
  m.hidden_bias = Eigen::VectorXd::Zero(h);
  m.output_weights.resize(h);
  for (Eigen::Index j = 0; j < h; ++j) m.output_weights(j) = s2 * normal(rng);
  m.output_bias = 0.0;
  return m;
}

NnModel TrainNn(const RowMatrix& x, std::span<const int> y, const TrainConfig& config,
                std::size_t hidden_width, TrainTrace* trace) {
  config.Validate();
  CheckLabels(x, y);
  NnModel model = InitNn(static_cast<std::size_t>(x.cols()), hidden_width, config.seed);
  // Batch order draws from its own stream.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  if (trace) trace->losses = {NnLoss(model, x, y, config.l2)};
  NnModel grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    ForEachBatch(static_cast<std::size_t>(x.rows()), config.batch_size, rng,
                 [&](std::span<const std::size_t> rows, bool full) {
                   if (full) {
                     NnLoss(model, x, y, config.l2, &grad);
                   } else {
                     Labels yb;
                     for (auto r : rows) yb.push_back(y[r]);
                     NnLoss(model, GatherRows(x, rows), yb, config.l2, &grad);
                   }
                   model.hidden_weights -= config.learning_rate * grad.hidden_weights;
                   model.hidden_bias -= config.learning_rate * grad.hidden_bias;
                   model.output_weights -= config.learning_rate * grad.output_weights;
                   model.output_bias -= config.learning_rate * grad.output_bias;
                 });
    if (trace) trace->losses.push_back(NnLoss(model, x, y, config.l2));
  }
  return model;
}

}  // namespace petbench
