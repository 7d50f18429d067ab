#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "mpa/bench.hpp"
#include "test_support.hpp"

using namespace mpa;

namespace {

SyntheticConfig small_suite() {
  SyntheticConfig cfg;
  cfg.seeds = 3;
  cfg.stds = 2;
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunRecord record(const std::string& id, const std::string& c, double train, double test) {
  RunRecord r;
  r.dataset_id = id;
  r.classifier = c;
  r.train_accuracy = train;
  r.test_accuracy = test;
  return r;
}

}  // namespace

TEST(Accuracy, Examples) {
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 1, 0}, std::vector<int>{1, 0, 0}), 2.0 / 3.0);
  EXPECT_EQ(accuracy(std::vector<int>{0, 1}, std::vector<int>{0, 1}), 1.0);
  EXPECT_EQ(accuracy(std::vector<int>{1, 0}, std::vector<int>{0, 1}), 0.0);
}

TEST(Accuracy, Errors) {
  EXPECT_MPA_ERROR(accuracy(std::vector<int>{1}, std::vector<int>{1, 0}), ErrorCode::LengthMismatch);
  EXPECT_MPA_ERROR(accuracy(std::vector<int>{}, std::vector<int>{}), ErrorCode::EmptyDataset);
}

TEST(Aggregate, MeansGapAndFailures) {
  BenchReport report;
  report.records = {record("b", "mpa", 0.9, 0.8), record("a", "mpa", 1.0, 0.7), record("a", "knn", 0.5, 0.25)};
  RunRecord failed = record("c", "mpa", 0, 0);
  failed.ok = false;
  failed.error = "boom";
  report.records.push_back(failed);
  aggregate(report);
  ASSERT_EQ(report.aggregates.size(), 2u);
  EXPECT_EQ(report.aggregates[0].classifier, "knn");
  const auto& m = report.aggregate("mpa");
  EXPECT_EQ(m.runs, 2u);
  EXPECT_EQ(m.failed, 1u);
  EXPECT_NEAR(m.mean_train, 0.95, 1e-12);
  EXPECT_NEAR(m.mean_test, 0.75, 1e-12);
  EXPECT_NEAR(m.gap, m.mean_train - m.mean_test, 1e-12);
  EXPECT_EQ(report.records.front().dataset_id, "a");
  EXPECT_MPA_ERROR(report.aggregate("svm"), ErrorCode::InvalidParams);
}

TEST(Aggregate, OrderIndependentBitForBit) {
  const BenchReport base = run_synthetic_suite(small_suite());
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    BenchReport shuffled = base;
    rng.shuffle(std::span<RunRecord>(shuffled.records));
    aggregate(shuffled);
    ASSERT_EQ(shuffled.aggregates.size(), base.aggregates.size());
    for (std::size_t i = 0; i < base.aggregates.size(); ++i) {
      EXPECT_EQ(shuffled.aggregates[i].mean_train, base.aggregates[i].mean_train);
      EXPECT_EQ(shuffled.aggregates[i].mean_test, base.aggregates[i].mean_test);
    }
    EXPECT_EQ(to_tsv(shuffled), to_tsv(base));
  }
}

TEST(SyntheticSuite, SingleCellHasFourRecords) {
  SyntheticConfig cfg;
  cfg.seeds = 1;
  cfg.stds = 1;
  const BenchReport report = run_synthetic_suite(cfg);
  EXPECT_EQ(report.records.size(), 4u);
  EXPECT_EQ(report.aggregates.size(), 4u);
  std::vector<std::string> names;
  for (const auto& a : report.aggregates) names.push_back(a.classifier);
  EXPECT_EQ(names, (std::vector<std::string>{"knn", "svm", "mpa", "perceptron"}));
}

TEST(SyntheticSuite, ReportInvariants) {
  const BenchReport report = run_synthetic_suite(small_suite());
  EXPECT_EQ(report.records.size(), 3u * 2u * 4u);
  for (const auto& r : report.records) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_GE(r.train_accuracy, 0.0);
    EXPECT_LE(r.train_accuracy, 1.0);
    EXPECT_GE(r.test_accuracy, 0.0);
    EXPECT_LE(r.test_accuracy, 1.0);
  }
  for (const auto& a : report.aggregates) {
    double train = 0, test = 0;
    std::size_t n = 0;
    for (const auto& r : report.records)
      if (r.classifier == a.classifier) {
        train += r.train_accuracy;
        test += r.test_accuracy;
        ++n;
      }
    EXPECT_EQ(a.runs, n);
    EXPECT_NEAR(a.mean_train, train / n, 1e-12);
    EXPECT_NEAR(a.mean_test, test / n, 1e-12);
    EXPECT_NEAR(a.gap, a.mean_train - a.mean_test, 1e-12);
  }
}

TEST(SyntheticSuite, CellsReproducibleInIsolation) {
  const SyntheticConfig cfg = small_suite();
  const BenchReport report = run_synthetic_suite(cfg);
  for (std::size_t s = 0; s < cfg.seeds; ++s)
    for (std::size_t k = 0; k < cfg.stds; ++k)
      for (const auto& cell : run_synthetic_cell(cfg, s, k)) {
        const auto it = std::find_if(report.records.begin(), report.records.end(), [&](const RunRecord& r) {
          return r.dataset_id == cell.dataset_id && r.classifier == cell.classifier;
        });
        ASSERT_NE(it, report.records.end());
        EXPECT_EQ(it->train_accuracy, cell.train_accuracy);
        EXPECT_EQ(it->test_accuracy, cell.test_accuracy);
      }
}

TEST(SyntheticSuite, DeterministicUnderMasterSeed) {
  EXPECT_EQ(to_tsv(run_synthetic_suite(small_suite())), to_tsv(run_synthetic_suite(small_suite())));
  SyntheticConfig other = small_suite();
  other.master_seed = 1;
  EXPECT_NE(to_tsv(run_synthetic_suite(small_suite())), to_tsv(run_synthetic_suite(other)));
}

TEST(SyntheticSuite, FailedCellsAreRetained) {
  SyntheticConfig cfg = small_suite();
  cfg.n_per_class = 1;
  cfg.test_fraction = 0.5;  // one train row: always loses a class
  const BenchReport report = run_synthetic_suite(cfg);
  EXPECT_EQ(report.records.size(), 24u);
  for (const auto& r : report.records) EXPECT_FALSE(r.ok);
  for (const auto& a : report.aggregates) {
    EXPECT_EQ(a.runs, 0u);
    EXPECT_EQ(a.failed, 6u);
  }
  EXPECT_NE(render_table(report).find("24 failed run(s) excluded"), std::string::npos);
  EXPECT_NE(to_tsv(report).find("failed: "), std::string::npos);
}

TEST(SyntheticSuite, IdsAndSweep) {
  SyntheticConfig cfg;
  EXPECT_DOUBLE_EQ(sweep_std(cfg, 0), 1.0);
  EXPECT_NEAR(sweep_std(cfg, 9), 1.9, 1e-12);
  EXPECT_EQ(synthetic_id(cfg, 7, 3), "blobs/seed=007/std=1.30");
  cfg.seeds = 0;
  EXPECT_MPA_ERROR(run_synthetic_suite(cfg), ErrorCode::InvalidParams);
}

TEST(Tsv, LayoutAndRoundTripValues) {
  const BenchReport report = run_synthetic_suite(small_suite());
  const auto lines = lines_of(to_tsv(report));
  EXPECT_EQ(lines[0], "# mpa-bench-report 1");
  EXPECT_EQ(lines[1], "# protocol\tsynthetic");
  const auto header = std::find(lines.begin(), lines.end(),
                                "kind\tdataset\tclassifier\tstatus\ttrain_accuracy\ttest_accuracy\tgap\truns\tfailed");
  ASSERT_NE(header, lines.end());
  const auto body = static_cast<std::size_t>(lines.end() - header - 1);
  EXPECT_EQ(body, report.records.size() + report.aggregates.size());
  for (auto it = header + 1; it != lines.end(); ++it) {
    std::vector<std::string> fields;
    std::istringstream in(*it);
    for (std::string f; std::getline(in, f, '\t');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 9u) << *it;
    if (fields[0] == "aggregate") {
      EXPECT_EQ(detail::parse_real<double>(fields[5]), report.aggregate(fields[2]).mean_test);
    }
  }
}

TEST(RenderTable, SyntheticLayout) {
  const auto lines = lines_of(render_table(run_synthetic_suite(small_suite())));
  EXPECT_EQ(lines[0], "| Algorithm | Training Accuracy | Test Accuracy | Generalization Gap |");
  EXPECT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[2].rfind("| KNN | ", 0), 0u);
  EXPECT_EQ(lines[5].rfind("| Perceptron | ", 0), 0u);
}

// ---------------------------------------------------------------------------
// Dataset protocol

TEST(DatasetProtocol, StructureAndDeterminism) {
  const auto preset = dataset_preset("iris");
  const Dataset ds = load_csv(test::data_path("iris.csv"), preset.csv).data;
  ProtocolConfig cfg;
  cfg.dataset_name = preset.name;
  cfg.repetitions = 3;
  const BenchReport report = run_dataset_protocol(ds, cfg);
  EXPECT_EQ(report.records.size(), 6u);
  for (const auto& r : report.records) EXPECT_TRUE(r.ok) << r.error;
  EXPECT_EQ(report.aggregate("svm").runs, 3u);
  EXPECT_EQ(report.aggregate("mpa").runs, 3u);
  EXPECT_EQ(to_tsv(report), to_tsv(run_dataset_protocol(ds, cfg)));
  const auto lines = lines_of(render_table(report));
  EXPECT_EQ(lines[0], "| Run | SVM Training | SVM Testing | MPA Training | MPA Testing |");
  EXPECT_EQ(lines[2].rfind("| iris/rep=01 | ", 0), 0u);
  EXPECT_EQ(lines[5].rfind("| AVERAGE | ", 0), 0u);
  EXPECT_NE(to_tsv(report).find("# pipeline\tsplit > standardize > pca"), std::string::npos);
}

TEST(DatasetProtocol, RepetitionMatchesManualPipeline) {
  const auto preset = dataset_preset("penguins");
  const Dataset ds = load_csv(test::data_path("penguins.csv"), preset.csv).data;
  ProtocolConfig cfg;
  cfg.repetitions = 1;
  const auto recs = run_protocol_repetition(ds, cfg, 0);
  const std::uint64_t rep_seed = derive_seed(cfg.master_seed, 0);
  const Split split = train_test_split(ds, 0.2, rep_seed);
  const auto scaler = standardize_fit(split.train);
  const auto pca = pca_fit(standardize_apply(scaler, split.train), 3);
  const Dataset train = pca_apply(pca, standardize_apply(scaler, split.train));
  const Dataset test = pca_apply(pca, standardize_apply(scaler, split.test));
  LinearSvmConfig svm;
  svm.seed = derive_seed(rep_seed, 3);
  const auto model = linear_svm_fit(train, svm);
  ASSERT_EQ(recs[0].classifier, "svm");
  EXPECT_EQ(recs[0].test_accuracy, accuracy(model.predict_rows(test.features), test.labels));
  EXPECT_EQ(train.cols(), 3);
  EXPECT_EQ(test.rows(), 44);
}

TEST(DatasetProtocol, BadPcaKFailsEveryRepetition) {
  const Dataset ds = make_blobs(1, 1.0, 20, 2);
  ProtocolConfig cfg;
  cfg.pca_k = 3;
  const BenchReport report = run_dataset_protocol(ds, cfg);
  EXPECT_EQ(report.records.size(), 10u);
  for (const auto& r : report.records) {
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.error.find("k must be"), std::string::npos);
  }
}

TEST(DatasetPreset, KnownNames) {
  const auto pima = dataset_preset("Pima");
  EXPECT_EQ(pima.name, "pima");
  EXPECT_EQ(pima.eta, 0.00003);
  EXPECT_EQ(pima.csv.feature_columns.size(), 8u);
  EXPECT_EQ(dataset_preset("penguins").eta, 0.00005);
  EXPECT_EQ(dataset_preset("IRIS").eta, 0.00008);
  for (const char* name : {"pima", "penguins", "iris"}) {
    const auto p = dataset_preset(name);
    EXPECT_GE(p.eta, 0.00003);
    EXPECT_LE(p.eta, 0.00008);
  }
  EXPECT_MPA_ERROR(dataset_preset("mnist"), ErrorCode::InvalidParams);
}
