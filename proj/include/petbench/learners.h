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

#ifndef PETBENCH_LEARNERS_H_
#define PETBENCH_LEARNERS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "petbench/data_core.h"

namespace petbench {

struct TrainConfig {
  double learning_rate = 1.0;
  int epochs = 300;
  std::size_t batch_size = 0;  // 0 means full batch
  std::uint64_t seed = 0;
  double l2 = 0.0;

  void Validate() const;
};

TrainConfig DefaultLogRegConfig();
TrainConfig DefaultNnConfig();
inline constexpr std::size_t kDefaultHiddenWidth = 64;
inline constexpr std::size_t kDefaultNeighbours = 5;

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  double mean_log_loss = 0.0;
};

// Correct predictions over all predictions. Throws kLengthMismatch, kEmptyInput.
EvalResult Accuracy(std::span<const int> predictions, std::span<const int> labels);
// Accuracy of the 0.5-thresholded probabilities plus their mean log loss.
EvalResult Evaluate(const Eigen::VectorXd& probabilities, std::span<const int> labels);

Labels Threshold(const Eigen::VectorXd& probabilities);

class KnnModel {
 public:
  // Throws kPrecondition unless 1 <= neighbours <= rows.
  static KnnModel Fit(RowMatrix features, Labels labels, std::size_t neighbours = kDefaultNeighbours);

  // Majority vote of the nearest neighbours by Euclidean distance. Distance
  // ties go to the lower training row; a split vote goes to the single
  // nearest neighbour. Throws kDimensionMismatch.
  Labels Predict(const RowMatrix& queries) const;

  std::size_t neighbours() const { return neighbours_; }
  const RowMatrix& features() const { return features_; }

 private:
  RowMatrix features_;
  Labels labels_;
  std::size_t neighbours_ = kDefaultNeighbours;
};

struct LogRegModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  Eigen::VectorXd PredictProba(const RowMatrix& x) const;
  Labels Predict(const RowMatrix& x) const { return Threshold(PredictProba(x)); }
  nlohmann::json ToJson() const;
};

// One hidden rectifier layer and a logistic output unit.
struct NnModel {
  Eigen::MatrixXd hidden_weights;  // features x hidden
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd output_weights;  // hidden
  double output_bias = 0.0;

  Eigen::VectorXd PredictProba(const RowMatrix& x) const;
  Labels Predict(const RowMatrix& x) const { return Threshold(PredictProba(x)); }
  nlohmann::json ToJson() const;
};

// Mean log loss over the training data recorded before the first epoch and
// after every epoch.
struct TrainTrace {
  std::vector<double> losses;
};

// Mean log loss (+ l2/2 |w|^2) and, when `gradient` is non-null, its
// gradient in the same layout as the model.
double LogRegLoss(const LogRegModel& model, const RowMatrix& x, std::span<const int> y, double l2,
                  LogRegModel* gradient = nullptr);
double NnLoss(const NnModel& model, const RowMatrix& x, std::span<const int> y, double l2,
              NnModel* gradient = nullptr);

// Zero-initialized mini-batch gradient descent. Throws kNonBinaryLabels,
// kEmptyInput, kLengthMismatch, kPrecondition.
LogRegModel TrainLogReg(const RowMatrix& x, std::span<const int> y, const TrainConfig& config,
                        TrainTrace* trace = nullptr);
// He-initialized from config.seed; throws as TrainLogReg plus kPrecondition
// for hidden_width == 0.
NnModel InitNn(std::size_t features, std::size_t hidden_width, std::uint64_t seed);
NnModel TrainNn(const RowMatrix& x, std::span<const int> y, const TrainConfig& config,
                std::size_t hidden_width = kDefaultHiddenWidth, TrainTrace* trace = nullptr);

}  // namespace petbench

#endif  // PETBENCH_LEARNERS_H_
