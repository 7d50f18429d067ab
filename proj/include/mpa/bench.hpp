#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpa/baselines.hpp"
#include "mpa/dataset.hpp"
#include "mpa/mpa.hpp"

namespace mpa {

/// Fraction of positions where predictions equal labels.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

struct RunRecord {
  std::string dataset_id;
  std::string classifier;
  bool ok{true};
  std::string error;
  double train_accuracy{0};
  double test_accuracy{0};
};

struct Aggregate {
  std::string classifier;
  std::size_t runs{0};
  std::size_t failed{0};
  double mean_train{0};
  double mean_test{0};
  double gap{0};
};

struct BenchReport {
  std::string protocol;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<RunRecord> records;
  std::vector<Aggregate> aggregates;

  const Aggregate& aggregate(const std::string& classifier) const;
};

/// Sorts records by (dataset_id, classifier) and recomputes the per
/// classifier means over successful runs. Failed runs are counted, never
/// averaged.
void aggregate(BenchReport& report);

/// Self-describing tab-separated document: '#'-prefixed metadata lines, a
/// column header, one line per run record, then one line per aggregate.
std::string to_tsv(const BenchReport& report);

/// Human-readable table in the layout of the corresponding protocol.
std::string render_table(const BenchReport& report);

// ---------------------------------------------------------------------------
// Synthetic blob suite

struct SyntheticConfig {
  std::size_t seeds{50};
  std::size_t stds{10};
  double std_start{1.0};
  double std_step{0.1};
  std::size_t n_per_class{50};
  double test_fraction{0.2};
  std::uint64_t master_seed{0};
  MpaConfig<double> mpa{};
  PerceptronConfig perceptron{};
  int knn_k{3};
  LinearSvmConfig svm{};
};

/// Standard deviation used by the std_index-th column of the sweep.
double sweep_std(const SyntheticConfig& cfg, std::size_t std_index);

/// Identifier of a (seed, std) cell, e.g. "blobs/seed=007/std=1.30".
std::string synthetic_id(const SyntheticConfig& cfg, std::size_t dataset_seed, std::size_t std_index);

/// Split and per-classifier seeds for one cell all derive from
/// derive_seed(master_seed, dataset_seed, std_index).
std::vector<RunRecord> run_synthetic_cell(const SyntheticConfig& cfg, std::size_t dataset_seed,
                                          std::size_t std_index);

/// Every (seed, std) cell: make_blobs, 0.8/0.2 split, then MPA, perceptron,
/// k-NN and linear SVM with the same fixed parameters on every dataset.
BenchReport run_synthetic_suite(const SyntheticConfig& cfg);

// ---------------------------------------------------------------------------
// Real-dataset protocol

struct ProtocolConfig {
  std::string dataset_name{"dataset"};
  std::size_t repetitions{5};
  double test_fraction{0.2};
  Eigen::Index pca_k{3};
  std::uint64_t master_seed{0};
  MpaConfig<double> mpa{};
  LinearSvmConfig svm{};
};

/// Per repetition: seeded split, standardize on the training split, PCA on
/// the standardized training split, then MPA and linear SVM.
BenchReport run_dataset_protocol(const Dataset& ds, const ProtocolConfig& cfg);

/// Repetition seeds derive from derive_seed(master_seed, repetition).
std::vector<RunRecord> run_protocol_repetition(const Dataset& ds, const ProtocolConfig& cfg, std::size_t repetition);

// ---------------------------------------------------------------------------
// Bundled dataset presets

struct DatasetPreset {
  std::string name;
  CsvOptions csv;
  double eta;
  /// Long enough for moves of size eta*|lambda| to shift the boundary by
  /// O(1) standardized units.
  int epochs{5000};
};

/// "pima", "penguins" or "iris" (case-insensitive); throws InvalidParams
/// for anything else.
DatasetPreset dataset_preset(const std::string& name);

}  // namespace mpa
