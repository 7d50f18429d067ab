#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "mpa/dataset.hpp"

namespace mpa {

// Reference classifiers for the benchmark harness. They fill the roles of
// the usual off-the-shelf perceptron, k-NN and linear SVM; none of them is
// meant to match any particular library bit for bit.

struct PerceptronConfig {
  double eta{1.0};
  int epochs{100};
  std::uint64_t seed{8};
};

/// Rosenblatt perceptron with a fixed learning rate.
struct PerceptronModel {
  Eigen::VectorXd weights;
  double bias{0};
  int epochs_run{0};

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<int> predict_rows(const Eigen::MatrixXd& x) const;
};

/// Zero initialization; for each example in a shuffled order, updates
/// weights += eta*y*x and bias += eta*y whenever y*(w.x + b) <= 0, with
/// y in {-1, +1}. Stops early after an epoch without updates.
PerceptronModel perceptron_fit(const Dataset& train, const PerceptronConfig& cfg);

struct KnnModel {
  Eigen::MatrixXd points;
  std::vector<int> labels;
  int k{3};
};

KnnModel knn_fit(const Dataset& train, int k = 3);

/// Majority label among the k nearest training points (Euclidean, ties in
/// distance resolved by row order). A tied vote goes to the nearest point.
int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<int> knn_predict_rows(const KnnModel& model, const Eigen::MatrixXd& x);

struct LinearSvmConfig {
  /// L2 strength. Unset means 1/m, the analogue of C = 1.
  std::optional<double> lambda;
  int epochs{100};
  std::uint64_t seed{0};
};

struct LinearSvmModel {
  Eigen::VectorXd weights;
  double bias{0};
  double lambda{0};

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return decision(x) >= 0 ? 1 : 0; }
  std::vector<int> predict_rows(const Eigen::MatrixXd& x) const;
};

/// Pegasos: stochastic subgradient descent on
///   lambda/2 |w|^2 + mean(max(0, 1 - y (w.x + b)))
/// with step 1/(lambda t), projection onto the ball of radius 1/sqrt(lambda),
/// and the bias carried as a regularized constant feature. Returns the mean
/// iterate of the final epoch.
LinearSvmModel linear_svm_fit(const Dataset& train, const LinearSvmConfig& cfg);

}  // namespace mpa
