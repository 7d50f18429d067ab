#include "mpa/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "mpa/error.hpp"
#include "mpa/rng.hpp"

namespace mpa {

namespace {

const std::vector<std::string> kTableOrder{"knn", "svm", "mpa", "perceptron"};

std::string real(double v) { return detail::format_real(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string display_name(const std::string& classifier) {
  if (classifier == "knn") return "KNN";
  if (classifier == "svm") return "SVM";
  if (classifier == "mpa") return "MPA";
  if (classifier == "perceptron") return "Perceptron";
  return classifier;
}

MpaModel<double> train_mpa(const Dataset& train, const MpaConfig<double>& cfg) {
  auto model = initialize(train.features, std::span<const int>(train.labels), cfg);
  fit(model, train.features, std::span<const int>(train.labels), cfg);
  return model;
}

template <typename Fn>
RunRecord guarded(const std::string& id, const std::string& classifier, Fn&& fn) {
  RunRecord rec;
  rec.dataset_id = id;
  rec.classifier = classifier;
  try {
    const auto [train_acc, test_acc] = fn();
    rec.train_accuracy = train_acc;
    rec.test_accuracy = test_acc;
  } catch (const Error& err) {
    rec.ok = false;
    rec.error = err.what();
  }
  return rec;
}

std::vector<RunRecord> failed_cell(const std::string& id, const std::vector<std::string>& classifiers,
                                   const std::string& message) {
  std::vector<RunRecord> out;
  for (const auto& c : classifiers) {
    RunRecord rec;
    rec.dataset_id = id;
    rec.classifier = c;
    rec.ok = false;
    rec.error = message;
    out.push_back(rec);
  }
  return out;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == '\t' || ch == '\n') ch = ' ';
  return s;
}

}  // namespace

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "prediction/label lengths differ");
  if (labels.empty()) throw Error(ErrorCode::EmptyDataset, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

const Aggregate& BenchReport::aggregate(const std::string& classifier) const {
  for (const auto& a : aggregates)
    if (a.classifier == classifier) return a;
  throw Error(ErrorCode::InvalidParams, "no aggregate for '" + classifier + "'");
}

void aggregate(BenchReport& report) {
  std::sort(report.records.begin(), report.records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.dataset_id, a.classifier) < std::tie(b.dataset_id, b.classifier);
  });
  std::map<std::string, Aggregate> by_classifier;
  for (const auto& rec : report.records) {
    auto& agg = by_classifier[rec.classifier];
    agg.classifier = rec.classifier;
    if (!rec.ok) {
      ++agg.failed;
      continue;
    }
    ++agg.runs;
    agg.mean_train += rec.train_accuracy;
    agg.mean_test += rec.test_accuracy;
  }
  report.aggregates.clear();
  auto emit = [&](Aggregate agg) {
    if (agg.runs > 0) {
      agg.mean_train /= static_cast<double>(agg.runs);
      agg.mean_test /= static_cast<double>(agg.runs);
    }
    agg.gap = agg.mean_train - agg.mean_test;
    report.aggregates.push_back(agg);
  };
  for (const auto& name : kTableOrder) {
    auto it = by_classifier.find(name);
    if (it == by_classifier.end()) continue;
    emit(it->second);
    by_classifier.erase(it);
  }
  for (const auto& [name, agg] : by_classifier) emit(agg);
}

std::string to_tsv(const BenchReport& report) {
  std::ostringstream out;
  out << "# mpa-bench-report 1\n";
  out << "# protocol\t" << report.protocol << "\n";
  for (const auto& [key, value] : report.metadata) out << "# " << key << "\t" << value << "\n";
  out << "kind\tdataset\tclassifier\tstatus\ttrain_accuracy\ttest_accuracy\tgap\truns\tfailed\n";
  for (const auto& r : report.records) {
    out << "run\t" << r.dataset_id << "\t" << r.classifier << "\t";
    if (r.ok)
      out << "ok\t" << real(r.train_accuracy) << "\t" << real(r.test_accuracy) << "\t"
          << real(r.train_accuracy - r.test_accuracy) << "\t1\t0\n";
    else
      out << "failed: " << sanitize(r.error) << "\tnan\tnan\tnan\t0\t1\n";
  }
  for (const auto& a : report.aggregates) {
    out << "aggregate\t*\t" << a.classifier << "\t" << (a.runs > 0 ? "ok" : "failed") << "\t" << real(a.mean_train)
        << "\t" << real(a.mean_test) << "\t" << real(a.gap) << "\t" << a.runs << "\t" << a.failed << "\n";
  }
  return out.str();
}

std::string render_table(const BenchReport& report) {
  std::ostringstream out;
  if (report.protocol == "dataset") {
    // Per-repetition rows, percentages: SVM train/test then MPA train/test.
    std::map<std::string, std::map<std::string, const RunRecord*>> rows;
    for (const auto& r : report.records) rows[r.dataset_id][r.classifier] = &r;
    auto cell = [](const RunRecord* r, bool train) {
      if (r == nullptr || !r->ok) return std::string("failed");
      return fixed(100.0 * (train ? r->train_accuracy : r->test_accuracy), 2);
    };
    out << "| Run | SVM Training | SVM Testing | MPA Training | MPA Testing |\n";
    out << "|-----|--------------|-------------|--------------|-------------|\n";
    for (const auto& [id, by] : rows) {
      auto svm = by.count("svm") ? by.at("svm") : nullptr;
      auto mpa = by.count("mpa") ? by.at("mpa") : nullptr;
      out << "| " << id << " | " << cell(svm, true) << " | " << cell(svm, false) << " | " << cell(mpa, true) << " | "
          << cell(mpa, false) << " |\n";
    }
    auto avg = [&](const std::string& c, bool train) {
      for (const auto& a : report.aggregates)
        if (a.classifier == c && a.runs > 0) return fixed(100.0 * (train ? a.mean_train : a.mean_test), 2);
      return std::string("n/a");
    };
    out << "| AVERAGE | " << avg("svm", true) << " | " << avg("svm", false) << " | " << avg("mpa", true) << " | "
        << avg("mpa", false) << " |\n";
  } else {
    out << "| Algorithm | Training Accuracy | Test Accuracy | Generalization Gap |\n";
    out << "|-----------|-------------------|---------------|--------------------|\n";
    for (const auto& a : report.aggregates) {
      out << "| " << display_name(a.classifier) << " | " << fixed(a.mean_train, 4) << " | " << fixed(a.mean_test, 4)
          << " | " << fixed(a.gap, 4) << " |\n";
    }
  }
  std::size_t failed = 0;
  for (const auto& a : report.aggregates) failed += a.failed;
  if (failed > 0) out << failed << " failed run(s) excluded from the means\n";
  return out.str();
}

// ---------------------------------------------------------------------------

double sweep_std(const SyntheticConfig& cfg, std::size_t std_index) {
  return cfg.std_start + cfg.std_step * static_cast<double>(std_index);
}

std::string synthetic_id(const SyntheticConfig& cfg, std::size_t dataset_seed, std::size_t std_index) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "blobs/seed=%03zu/std=%.2f", dataset_seed, sweep_std(cfg, std_index));
  return buf;
}

std::vector<RunRecord> run_synthetic_cell(const SyntheticConfig& cfg, std::size_t dataset_seed, std::size_t std_index) {
  const std::string id = synthetic_id(cfg, dataset_seed, std_index);
  const std::uint64_t cell_seed = derive_seed(cfg.master_seed, dataset_seed, std_index);
  Split split;
  try {
    const Dataset ds = make_blobs(dataset_seed, sweep_std(cfg, std_index), cfg.n_per_class, 2);
    split = train_test_split(ds, cfg.test_fraction, cell_seed);
  } catch (const Error& err) {
    return failed_cell(id, kTableOrder, err.what());
  }
  const Dataset& train = split.train;
  const Dataset& test = split.test;

  std::vector<RunRecord> out;
  out.push_back(guarded(id, "knn", [&] {
    const auto model = knn_fit(train, cfg.knn_k);
    return std::pair{accuracy(knn_predict_rows(model, train.features), train.labels),
                     accuracy(knn_predict_rows(model, test.features), test.labels)};
  }));
  out.push_back(guarded(id, "svm", [&] {
    LinearSvmConfig svm = cfg.svm;
    svm.seed = derive_seed(cell_seed, 3);
    const auto model = linear_svm_fit(train, svm);
    return std::pair{accuracy(model.predict_rows(train.features), train.labels),
                     accuracy(model.predict_rows(test.features), test.labels)};
  }));
  out.push_back(guarded(id, "mpa", [&] {
    MpaConfig<double> mpa = cfg.mpa;
    mpa.seed = derive_seed(cell_seed, 1);
    const auto model = train_mpa(train, mpa);
    return std::pair{accuracy(predict_rows(model, train.features), train.labels),
                     accuracy(predict_rows(model, test.features), test.labels)};
  }));
  out.push_back(guarded(id, "perceptron", [&] {
    const auto model = perceptron_fit(train, cfg.perceptron);
    return std::pair{accuracy(model.predict_rows(train.features), train.labels),
                     accuracy(model.predict_rows(test.features), test.labels)};
  }));
  return out;
}

BenchReport run_synthetic_suite(const SyntheticConfig& cfg) {
  if (cfg.seeds < 1 || cfg.stds < 1) throw Error(ErrorCode::InvalidParams, "need at least one seed and one std");
  BenchReport report;
  report.protocol = "synthetic";
  report.metadata = {
      {"master_seed", std::to_string(cfg.master_seed)},
      {"dataset_seeds", "0.." + std::to_string(cfg.seeds - 1)},
      {"stds", real(sweep_std(cfg, 0)) + ".." + real(sweep_std(cfg, cfg.stds - 1)) + " step " + real(cfg.std_step)},
      {"n_per_class", std::to_string(cfg.n_per_class)},
      {"test_fraction", real(cfg.test_fraction)},
      {"eta", real(cfg.mpa.eta)},
      {"alpha", cfg.mpa.alpha ? real(*cfg.mpa.alpha) : std::string("auto")},
      {"epochs", std::to_string(cfg.mpa.epochs)},
      {"near_cluster_percentile", real(cfg.mpa.near_cluster_percentile)},
      {"init_spread", real(cfg.mpa.init_spread)},
      {"knn_k", std::to_string(cfg.knn_k)},
  };
  for (std::size_t s = 0; s < cfg.seeds; ++s)
    for (std::size_t k = 0; k < cfg.stds; ++k) {
      auto cell = run_synthetic_cell(cfg, s, k);
      report.records.insert(report.records.end(), cell.begin(), cell.end());
    }
  aggregate(report);
  return report;
}

// ---------------------------------------------------------------------------

std::vector<RunRecord> run_protocol_repetition(const Dataset& ds, const ProtocolConfig& cfg, std::size_t repetition) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "/rep=%02zu", repetition + 1);
  const std::string id = cfg.dataset_name + buf;
  const std::uint64_t rep_seed = derive_seed(cfg.master_seed, repetition);

  Dataset train, test;
  try {
    const Split split = train_test_split(ds, cfg.test_fraction, rep_seed);
    const auto scaler = standardize_fit(split.train);
    const Dataset train_std = standardize_apply(scaler, split.train);
    const Dataset test_std = standardize_apply(scaler, split.test);
    const auto pca = pca_fit(train_std, cfg.pca_k);
    train = pca_apply(pca, train_std);
    test = pca_apply(pca, test_std);
  } catch (const Error& err) {
    return failed_cell(id, {"svm", "mpa"}, err.what());
  }

  std::vector<RunRecord> out;
  out.push_back(guarded(id, "svm", [&] {
    LinearSvmConfig svm = cfg.svm;
    svm.seed = derive_seed(rep_seed, 3);
    const auto model = linear_svm_fit(train, svm);
    return std::pair{accuracy(model.predict_rows(train.features), train.labels),
                     accuracy(model.predict_rows(test.features), test.labels)};
  }));
  out.push_back(guarded(id, "mpa", [&] {
    MpaConfig<double> mpa = cfg.mpa;
    mpa.seed = derive_seed(rep_seed, 1);
    const auto model = train_mpa(train, mpa);
    return std::pair{accuracy(predict_rows(model, train.features), train.labels),
                     accuracy(predict_rows(model, test.features), test.labels)};
  }));
  return out;
}

BenchReport run_dataset_protocol(const Dataset& ds, const ProtocolConfig& cfg) {
  if (cfg.repetitions < 1) throw Error(ErrorCode::InvalidParams, "need at least one repetition");
  ds.validate();
  BenchReport report;
  report.protocol = "dataset";
  report.metadata = {
      {"dataset", cfg.dataset_name},
      {"rows", std::to_string(ds.rows())},
      {"features", std::to_string(ds.cols())},
      {"master_seed", std::to_string(cfg.master_seed)},
      {"repetitions", std::to_string(cfg.repetitions)},
      {"test_fraction", real(cfg.test_fraction)},
      {"pipeline", "split > standardize > pca"},
      {"pca_k", std::to_string(cfg.pca_k)},
      {"eta", real(cfg.mpa.eta)},
      {"alpha", cfg.mpa.alpha ? real(*cfg.mpa.alpha) : std::string("auto")},
      {"epochs", std::to_string(cfg.mpa.epochs)},
      {"near_cluster_percentile", real(cfg.mpa.near_cluster_percentile)},
      {"init_spread", real(cfg.mpa.init_spread)},
  };
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    auto rep = run_protocol_repetition(ds, cfg, r);
    report.records.insert(report.records.end(), rep.begin(), rep.end());
  }
  aggregate(report);
  return report;
}

// ---------------------------------------------------------------------------

DatasetPreset dataset_preset(const std::string& name) {
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  if (key == "pima") {
    return {"pima",
            {"Outcome",
             "1",
             {"Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin", "BMI", "DiabetesPedigreeFunction",
              "Age"},
             {}},
            0.00003, 5000};
  }
  if (key == "penguins") {
    return {"penguins",
            {"species",
             "Adelie",
             {"bill_length_mm", "bill_depth_mm", "flipper_length_mm", "body_mass_g"},
             {"Adelie", "Chinstrap"}},
            0.00005, 5000};
  }
  if (key == "iris") {
    return {"iris",
            {"Species",
             "Iris-versicolor",
             {"SepalLengthCm", "SepalWidthCm", "PetalLengthCm", "PetalWidthCm"},
             {"Iris-versicolor", "Iris-virginica"}},
            0.00008, 5000};
  }
  throw Error(ErrorCode::InvalidParams, "unknown dataset preset '" + name + "'");
}

}  // namespace mpa
