#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpa/bench.hpp"
#include "mpa/dataset.hpp"
#include "mpa/error.hpp"
#include "mpa/mpa.hpp"
#include "mpa/plot.hpp"

namespace mpa::cli {

namespace {

struct DataFlags {
  std::string input;
  std::string label_col;
  std::string positive_label;
  std::vector<std::string> features;
  std::vector<std::string> classes;

  CsvOptions csv() const { return {label_col, positive_label, features, classes}; }
};

struct MpaFlags {
  double eta{MpaConfig<double>{}.eta};
  std::optional<double> alpha;
  int epochs{MpaConfig<double>{}.epochs};
  double near_cluster_pct{MpaConfig<double>{}.near_cluster_percentile};
  double init_spread{MpaConfig<double>{}.init_spread};
  std::uint64_t seed{0};
  bool no_early_stop{false};

  CLI::Option* eta_opt{nullptr};
  CLI::Option* epochs_opt{nullptr};

  MpaConfig<double> config() const {
    MpaConfig<double> cfg;
    cfg.eta = eta;
    cfg.alpha = alpha;
    cfg.epochs = epochs;
    cfg.near_cluster_percentile = near_cluster_pct;
    cfg.init_spread = init_spread;
    cfg.seed = seed;
    cfg.early_stop = !no_early_stop;
    return cfg;
  }
};

void add_data_flags(CLI::App* app, DataFlags& flags, bool label_required) {
  app->add_option("-i,--input", flags.input, "input CSV")->required()->check(CLI::ExistingFile);
  auto* label = app->add_option("--label-col", flags.label_col, "label column");
  if (label_required) label->required();
  app->add_option("--positive-label", flags.positive_label, "label value mapped to class 1");
  app->add_option("--features", flags.features, "feature columns (comma separated)")->delimiter(',');
  app->add_option("--classes", flags.classes, "keep only rows with these label values")->delimiter(',');
}

void add_mpa_flags(CLI::App* app, MpaFlags& flags) {
  flags.eta_opt = app->add_option("--eta", flags.eta, "learning rate")->capture_default_str();
  app->add_option("--alpha", flags.alpha, "overfit-guard proximity threshold (default 0.1 x initial spacing)");
  flags.epochs_opt = app->add_option("--epochs", flags.epochs, "training epochs")->capture_default_str();
  app->add_option("--near-cluster-pct", flags.near_cluster_pct, "near-cluster percentile")->capture_default_str();
  app->add_option("--init-spread", flags.init_spread, "initial spacing / mean gap")->capture_default_str();
  app->add_option("--seed", flags.seed, "random seed")->capture_default_str();
  app->add_flag("--no-early-stop", flags.no_early_stop, "train for all epochs");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::FileNotFound, "failed writing '" + path + "'");
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string training_log(const TrainingLog<double>& log) {
  std::ostringstream out;
  out << "# mpa training log\n";
  out << "# moves_applied\t" << log.moves_applied << "\n";
  out << "# moves_reverted\t" << log.moves_reverted << "\n";
  out << "# moves_skipped\t" << log.moves_skipped << "\n";
  out << "epoch\tmisclassified\tmoving_points\n";
  for (std::size_t e = 0; e < log.trajectory.size(); ++e) {
    out << e << "\t" << (e == 0 ? std::string("-") : std::to_string(log.misclassified[e - 1])) << "\t";
    const auto& pts = log.trajectory[e];
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (i) out << ";";
      for (Eigen::Index j = 0; j < pts.cols(); ++j) out << (j ? " " : "") << detail::format_real(pts(i, j));
    }
    out << "\n";
  }
  return out.str();
}

/// Tracks which step is running so errors can name it.
struct Stage {
  std::string name{"parse arguments"};
};

Dataset load_data(const DataFlags& flags, std::ostream& out) {
  const CsvLoad loaded = load_csv(flags.input, flags.csv());
  out << "loaded " << loaded.data.rows() << " rows from " << flags.input << " (" << loaded.dropped_rows
      << " dropped), features: " << join(loaded.data.feature_names, ", ") << "\n";
  return loaded.data;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moving-points hyperplane classifier", "mpa"};
  app.set_config("--config", "", "key=value config file; flags take precedence");
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "train on a CSV and save the model");
  DataFlags fit_data;
  MpaFlags fit_mpa;
  std::string fit_output, fit_log;
  add_data_flags(fit_cmd, fit_data, true);
  add_mpa_flags(fit_cmd, fit_mpa);
  fit_cmd->add_option("-o,--output", fit_output, "model file")->required();
  fit_cmd->add_option("--log", fit_log, "training log (default <output>.log)");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "classify CSV rows with a saved model");
  DataFlags predict_data;
  std::string predict_model, predict_output;
  add_data_flags(predict_cmd, predict_data, false);
  predict_cmd->add_option("-m,--model", predict_model, "model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("-o,--output", predict_output, "predictions CSV (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run an evaluation protocol");
  bench_cmd->require_subcommand(1);

  auto* synth_cmd = bench_cmd->add_subcommand("synthetic", "blob-suite protocol");
  SyntheticConfig synth;
  MpaFlags synth_mpa;
  std::string synth_output, synth_table;
  synth_cmd->add_option("--seeds", synth.seeds, "dataset seeds 0..N-1")->capture_default_str();
  synth_cmd->add_option("--stds", synth.stds, "number of std values in the sweep")->capture_default_str();
  synth_cmd->add_option("--std-start", synth.std_start, "first std")->capture_default_str();
  synth_cmd->add_option("--std-step", synth.std_step, "std increment")->capture_default_str();
  synth_cmd->add_option("--n-per-class", synth.n_per_class, "samples per class")->capture_default_str();
  synth_cmd->add_option("--test-fraction", synth.test_fraction, "test split fraction")->capture_default_str();
  synth_cmd->add_option("--knn-k", synth.knn_k, "k for k-NN")->capture_default_str();
  add_mpa_flags(synth_cmd, synth_mpa);
  synth_cmd->add_option("-o,--output", synth_output, "report file (TSV)");
  synth_cmd->add_option("--table", synth_table, "rendered table file");

  auto* dataset_cmd = bench_cmd->add_subcommand("dataset", "split > standardize > PCA protocol on a CSV");
  DataFlags ds_data;
  MpaFlags ds_mpa;
  ProtocolConfig protocol;
  std::string ds_preset, ds_output, ds_table;
  dataset_cmd->add_option("-i,--input", ds_data.input, "input CSV")->required()->check(CLI::ExistingFile);
  dataset_cmd->add_option("--preset", ds_preset, "pima, penguins or iris: column, eta and epoch defaults");
  auto* ds_label = dataset_cmd->add_option("--label-col", ds_data.label_col, "label column");
  auto* ds_positive = dataset_cmd->add_option("--positive-label", ds_data.positive_label, "label value for class 1");
  auto* ds_features =
      dataset_cmd->add_option("--features", ds_data.features, "feature columns (comma separated)")->delimiter(',');
  auto* ds_classes =
      dataset_cmd->add_option("--classes", ds_data.classes, "keep only these label values")->delimiter(',');
  dataset_cmd->add_option("--reps", protocol.repetitions, "repetitions")->capture_default_str();
  dataset_cmd->add_option("--pca-k", protocol.pca_k, "PCA components")->capture_default_str();
  dataset_cmd->add_option("--test-fraction", protocol.test_fraction, "test split fraction")->capture_default_str();
  add_mpa_flags(dataset_cmd, ds_mpa);
  dataset_cmd->add_option("-o,--output", ds_output, "report file (TSV)");
  dataset_cmd->add_option("--table", ds_table, "rendered table file");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render a 2-D model and dataset as SVG");
  DataFlags plot_data;
  std::string plot_model, plot_output;
  PlotOptions plot_options;
  add_data_flags(plot_cmd, plot_data, true);
  plot_cmd->add_option("-m,--model", plot_model, "model file")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("-o,--output", plot_output, "SVG file")->required();
  plot_cmd->add_option("--width", plot_options.width, "pixels")->capture_default_str();
  plot_cmd->add_option("--height", plot_options.height, "pixels")->capture_default_str();
  plot_cmd->add_option("--title", plot_options.title, "plot title");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error [parse arguments]: " << e.what() << "\n";
    return kExitInput;
  }

  Stage stage;
  try {
    if (*fit_cmd) {
      stage.name = "load data";
      const Dataset ds = load_data(fit_data, out);
      stage.name = "train";
      const auto cfg = fit_mpa.config();
      auto model = initialize(ds.features, std::span<const int>(ds.labels), cfg);
      model.set_feature_names(ds.feature_names);
      const auto log = fit(model, ds.features, std::span<const int>(ds.labels), cfg);
      const auto predictions = predict_rows(model, ds.features);
      const double acc = accuracy(predictions, ds.labels);
      stage.name = "write output";
      write_file(fit_output, to_text(model));
      write_file(fit_log.empty() ? fit_output + ".log" : fit_log, training_log(log));
      out << "epochs run: " << log.misclassified.size() << "\n";
      out << "training accuracy: " << detail::format_real(acc) << "\n";
      return kExitOk;
    }

    if (*predict_cmd) {
      stage.name = "load model";
      auto model = from_text<double>(read_file(predict_model));
      stage.name = "load data";
      DataFlags flags = predict_data;
      if (flags.features.empty()) flags.features = model.feature_names();
      const CsvLoad loaded = load_csv(flags.input, flags.csv());
      if (loaded.data.cols() != model.dim())
        throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(model.dim()) + " features, data has " +
                                                      std::to_string(loaded.data.cols()));
      stage.name = "predict";
      const auto predictions = predict_rows(model, loaded.data.features);
      std::ostringstream csv;
      csv << "row,prediction\n";
      for (std::size_t i = 0; i < predictions.size(); ++i) csv << i << "," << predictions[i] << "\n";
      stage.name = "write output";
      if (predict_output.empty())
        out << csv.str();
      else
        write_file(predict_output, csv.str());
      if (!flags.label_col.empty())
        out << "accuracy: " << detail::format_real(accuracy(predictions, loaded.data.labels)) << "\n";
      return kExitOk;
    }

    if (*synth_cmd) {
      stage.name = "bench";
      synth.master_seed = synth_mpa.seed;
      synth.mpa = synth_mpa.config();
      const BenchReport report = run_synthetic_suite(synth);
      const std::string table = render_table(report);
      stage.name = "write output";
      if (!synth_output.empty()) write_file(synth_output, to_tsv(report));
      if (!synth_table.empty()) write_file(synth_table, table);
      out << report.records.size() << " records over " << synth.seeds * synth.stds << " datasets\n" << table;
      return kExitOk;
    }

    if (*dataset_cmd) {
      stage.name = "load data";
      CsvOptions csv;
      double eta = ds_mpa.eta;
      int epochs = ds_mpa.epochs;
      if (!ds_preset.empty()) {
        const DatasetPreset preset = dataset_preset(ds_preset);
        csv = preset.csv;
        if (ds_mpa.eta_opt->count() == 0) eta = preset.eta;
        if (ds_mpa.epochs_opt->count() == 0) epochs = preset.epochs;
        protocol.dataset_name = preset.name;
      }
      if (ds_label->count()) csv.label_column = ds_data.label_col;
      if (ds_positive->count()) csv.positive_label = ds_data.positive_label;
      if (ds_features->count()) csv.feature_columns = ds_data.features;
      if (ds_classes->count()) csv.keep_labels = ds_data.classes;
      if (csv.label_column.empty()) throw Error(ErrorCode::InvalidParams, "--label-col or --preset is required");
      const CsvLoad loaded = load_csv(ds_data.input, csv);
      out << "loaded " << loaded.data.rows() << " rows (" << loaded.dropped_rows << " dropped), "
          << loaded.data.count(1) << " positive, features: " << join(loaded.data.feature_names, ", ") << "\n";

      stage.name = "bench";
      protocol.master_seed = ds_mpa.seed;
      protocol.mpa = ds_mpa.config();
      protocol.mpa.eta = eta;
      protocol.mpa.epochs = epochs;
      const BenchReport report = run_dataset_protocol(loaded.data, protocol);
      const std::string table = render_table(report);
      stage.name = "write output";
      if (!ds_output.empty()) write_file(ds_output, to_tsv(report));
      if (!ds_table.empty()) write_file(ds_table, table);
      out << table;
      return kExitOk;
    }

    if (*plot_cmd) {
      stage.name = "load model";
      const auto model = from_text<double>(read_file(plot_model));
      if (model.dim() != 2) throw Error(ErrorCode::RefuseNon2D, "model has " + std::to_string(model.dim()) + " features; plots are 2-D only");
      stage.name = "load data";
      DataFlags flags = plot_data;
      if (flags.features.empty()) flags.features = model.feature_names();
      const Dataset ds = load_data(flags, out);
      stage.name = "plot";
      const std::string svg = render_svg(model, ds, plot_options);
      stage.name = "write output";
      write_file(plot_output, svg);
      out << "wrote " << plot_output << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << stage.name << "]: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error [" << stage.name << "]: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace mpa::cli
