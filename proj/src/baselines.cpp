#include "mpa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpa/error.hpp"
#include "mpa/rng.hpp"

namespace mpa {

namespace {

void check_training_set(const Dataset& train) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyDataset, "empty training set");
  train.validate();
}

std::vector<Eigen::Index> identity_order(Eigen::Index m) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  return order;
}

double signed_label(int label) { return label == 1 ? 1.0 : -1.0; }

}  // namespace

int PerceptronModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return weights.dot(x) + bias > 0 ? 1 : 0;
}

std::vector<int> PerceptronModel::predict_rows(const Eigen::MatrixXd& x) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()));
  return out;
}

PerceptronModel perceptron_fit(const Dataset& train, const PerceptronConfig& cfg) {
  check_training_set(train);
  if (!(cfg.eta > 0) || cfg.epochs < 1) throw Error(ErrorCode::InvalidParams, "bad perceptron config");
  PerceptronModel model;
  model.weights = Eigen::VectorXd::Zero(train.cols());
  Rng rng(cfg.seed);
  auto order = identity_order(train.rows());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    ++model.epochs_run;
    bool updated = false;
    for (const Eigen::Index i : order) {
      const double y = signed_label(train.labels[static_cast<std::size_t>(i)]);
      const auto x = train.features.row(i).transpose();
      if (y * (model.weights.dot(x) + model.bias) <= 0) {
        model.weights += cfg.eta * y * x;
        model.bias += cfg.eta * y;
        updated = true;
      }
    }
    if (!updated) break;
  }
  return model;
}

// ---------------------------------------------------------------------------

KnnModel knn_fit(const Dataset& train, int k) {
  check_training_set(train);
  if (k < 1 || k > train.rows()) throw Error(ErrorCode::InvalidParams, "k must be in [1, training size]");
  return {train.features, train.labels, k};
}

int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (model.points.rows() == 0) throw Error(ErrorCode::EmptyModel, "k-NN model holds no points");
  if (x.size() != model.points.cols()) throw Error(ErrorCode::DimensionMismatch, "query dim differs");
  const Eigen::VectorXd dist = (model.points.rowwise() - x.transpose()).rowwise().squaredNorm();
  auto order = identity_order(model.points.rows());
  const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(model.k, model.points.rows()));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return dist(a) < dist(b) || (dist(a) == dist(b) && a < b); });
  int votes[2] = {0, 0};
  for (std::size_t i = 0; i < k; ++i) ++votes[model.labels[static_cast<std::size_t>(order[i])]];
  if (votes[0] == votes[1]) return model.labels[static_cast<std::size_t>(order[0])];
  return votes[1] > votes[0] ? 1 : 0;
}

std::vector<int> knn_predict_rows(const KnnModel& model, const Eigen::MatrixXd& x) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(knn_predict(model, x.row(i).transpose()));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> LinearSvmModel::predict_rows(const Eigen::MatrixXd& x) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()));
  return out;
}

LinearSvmModel linear_svm_fit(const Dataset& train, const LinearSvmConfig& cfg) {
  check_training_set(train);
  if (cfg.epochs < 1) throw Error(ErrorCode::InvalidParams, "epochs must be >= 1");
  const Eigen::Index m = train.rows();
  const Eigen::Index n = train.cols();
  const double lambda = cfg.lambda.value_or(1.0 / static_cast<double>(m));
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidParams, "lambda must be > 0");

  // Augmented weight vector: the last entry multiplies a constant 1.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd xa(n + 1);
  const double radius = 1.0 / std::sqrt(lambda);
  Rng rng(cfg.seed);
  auto order = identity_order(m);
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    const bool last = epoch + 1 == cfg.epochs;
    for (const Eigen::Index i : order) {
      ++step;
      const double eta = 1.0 / (lambda * static_cast<double>(step));
      const double y = signed_label(train.labels[static_cast<std::size_t>(i)]);
      xa.head(n) = train.features.row(i).transpose();
      xa(n) = 1.0;
      const double margin = y * w.dot(xa);
      w *= 1.0 - eta * lambda;
      if (margin < 1.0) w += eta * y * xa;
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
      if (last) avg += w;
    }
  }
  avg /= static_cast<double>(m);
  LinearSvmModel model;
  model.weights = avg.head(n);
  model.bias = avg(n);
  model.lambda = lambda;
  return model;
}

}  // namespace mpa
