#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mpa {

/// m examples by n features with binary labels.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  std::size_t count(int label) const;

  /// Throws unless the shape and labels are consistent.
  void validate() const;
};

Dataset select_rows(const Dataset& ds, std::span<const Eigen::Index> rows);

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  /// Empty loads features only; every label is then 0.
  std::string label_column;
  /// Rows whose label equals this value become class 1, all others class 0.
  std::string positive_label;
  /// Empty selects every non-label column whose values are all numeric.
  std::vector<std::string> feature_columns;
  /// When non-empty, rows with any other label value are ignored.
  std::vector<std::string> keep_labels;
};

struct CsvLoad {
  Dataset data;
  /// Rows dropped for a missing ("" or "NA") or unparseable value.
  std::size_t dropped_rows{0};
};

CsvLoad load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Splits one CSV record on commas, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

// ---------------------------------------------------------------------------
// Synthetic data

/// Two isotropic Gaussian clusters. Centres are uniform in [-10, 10]^dim.
/// Draw order from Rng(seed): class-0 centre, class-1 centre, then the
/// class-0 samples row by row, then the class-1 samples. Rows are stored in
/// that order (class 0 first).
Dataset make_blobs(std::uint64_t seed, double stddev, std::size_t n_per_class, Eigen::Index dim);

// ---------------------------------------------------------------------------
// Preprocessing

struct StandardizerParams {
  Eigen::VectorXd mean;
  /// Population standard deviation.
  Eigen::VectorXd stddev;
};

StandardizerParams standardize_fit(const Dataset& train);
Dataset standardize_apply(const StandardizerParams& params, const Dataset& ds);

struct SymmetricEigen {
  /// Descending.
  Eigen::VectorXd values;
  /// Column i pairs with values(i).
  Eigen::MatrixXd vectors;
  int sweeps{0};
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric);

/// Covariance with an (m - 1) divisor.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x);

struct PcaParams {
  Eigen::VectorXd mean;
  /// n by k, orthonormal columns; the largest-magnitude entry of each
  /// column is positive.
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance;

  Eigen::Index k() const { return components.cols(); }
};

PcaParams pca_fit(const Dataset& train, Eigen::Index k);
Dataset pca_apply(const PcaParams& params, const Dataset& ds);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> test_rows;
};

/// Shuffles row indices with Rng(seed) and sends the first
/// ceil(m * test_fraction) to the test split. Both splits keep the original
/// row order. Throws DegenerateSplit when the training split lacks a class.
Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace mpa
