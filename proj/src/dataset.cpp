#include "mpa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "mpa/error.hpp"
#include "mpa/rng.hpp"

namespace mpa {

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void Dataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw Error(ErrorCode::LengthMismatch, "label count differs from row count");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw Error(ErrorCode::LengthMismatch, "feature name count differs from column count");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error(ErrorCode::NonBinaryLabels, "labels must be 0 or 1");
  if (!features.allFinite()) throw Error(ErrorCode::InvalidParams, "non-finite feature value");
}

Dataset select_rows(const Dataset& ds, std::span<const Eigen::Index> rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(rows[i])]);
  }
  out.feature_names = ds.feature_names;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& field) { return field.empty() || field == "NA"; }

std::optional<double> parse_number(const std::string& field) {
  double v{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (begin != end && *begin == '+') ++begin;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

CsvLoad load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::NoRowsRemaining, "'" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv_line(line);
  const bool labelled = !options.label_column.empty();
  const std::size_t label_col = labelled ? column_index(header, options.label_column) : header.size();

  std::vector<std::vector<std::string>> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    fields.resize(header.size() + 1);
    const std::string& label = fields[label_col];
    if (labelled && !options.keep_labels.empty() && !is_missing(label) &&
        std::find(options.keep_labels.begin(), options.keep_labels.end(), label) == options.keep_labels.end())
      continue;
    records.push_back(std::move(fields));
  }

  std::vector<std::size_t> feature_cols;
  if (options.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col) continue;
      const bool numeric = std::all_of(records.begin(), records.end(), [&](const auto& r) {
        return is_missing(r[c]) || parse_number(r[c]).has_value();
      });
      if (numeric) feature_cols.push_back(c);
    }
    if (feature_cols.empty()) throw Error(ErrorCode::MissingColumn, "no numeric feature columns");
  } else {
    for (const auto& name : options.feature_columns) feature_cols.push_back(column_index(header, name));
  }

  CsvLoad result;
  std::vector<double> values;
  std::vector<int> labels;
  for (const auto& r : records) {
    bool ok = !labelled || !is_missing(r[label_col]);
    std::vector<double> row;
    for (std::size_t c : feature_cols) {
      if (!ok) break;
      auto v = is_missing(r[c]) ? std::nullopt : parse_number(r[c]);
      if (!v) ok = false;
      else row.push_back(*v);
    }
    if (!ok) {
      ++result.dropped_rows;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(labelled && r[label_col] == options.positive_label ? 1 : 0);
  }

  if (labels.empty()) throw Error(ErrorCode::NoRowsRemaining, "no usable rows in '" + path.string() + "'");
  const auto n = static_cast<Eigen::Index>(feature_cols.size());
  const auto m = static_cast<Eigen::Index>(labels.size());
  result.data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), m, n);
  result.data.labels = std::move(labels);
  for (std::size_t c : feature_cols) result.data.feature_names.push_back(header[c]);
  if (labelled && (result.data.count(0) == 0 || result.data.count(1) == 0))
    throw Error(ErrorCode::SingleClass, "only one class present after loading '" + path.string() + "'");
  return result;
}

// ---------------------------------------------------------------------------

Dataset make_blobs(std::uint64_t seed, double stddev, std::size_t n_per_class, Eigen::Index dim) {
  if (!(stddev > 0) || !std::isfinite(stddev)) throw Error(ErrorCode::InvalidParams, "stddev must be > 0");
  if (n_per_class < 1) throw Error(ErrorCode::InvalidParams, "need at least one sample per class");
  if (dim < 2) throw Error(ErrorCode::InvalidParams, "dim must be >= 2");

  Rng rng(seed);
  Eigen::MatrixXd centers(2, dim);
  for (Eigen::Index c = 0; c < 2; ++c)
    for (Eigen::Index j = 0; j < dim; ++j) centers(c, j) = rng.uniform(-10.0, 10.0);

  const auto per = static_cast<Eigen::Index>(n_per_class);
  Dataset ds;
  ds.features.resize(2 * per, dim);
  ds.labels.resize(static_cast<std::size_t>(2 * per));
  for (Eigen::Index c = 0; c < 2; ++c) {
    for (Eigen::Index i = 0; i < per; ++i) {
      const Eigen::Index row = c * per + i;
      for (Eigen::Index j = 0; j < dim; ++j) ds.features(row, j) = centers(c, j) + stddev * rng.normal();
      ds.labels[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  }
  for (Eigen::Index j = 0; j < dim; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  return ds;
}

// ---------------------------------------------------------------------------

StandardizerParams standardize_fit(const Dataset& train) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot standardize an empty dataset");
  StandardizerParams p;
  p.mean = train.features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = train.features.rowwise() - p.mean.transpose();
  p.stddev = (centered.colwise().squaredNorm() / static_cast<double>(train.rows())).cwiseSqrt().transpose();
  return p;
}

Dataset standardize_apply(const StandardizerParams& params, const Dataset& ds) {
  if (params.mean.size() != ds.cols()) throw Error(ErrorCode::DimensionMismatch, "standardizer dims differ");
  Dataset out = ds;
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    const double sd = params.stddev(j);
    if (sd <= 1e-12 * std::max(1.0, std::abs(params.mean(j))))
      out.features.col(j).setZero();
    else
      out.features.col(j) = (ds.features.col(j).array() - params.mean(j)) / sd;
  }
  return out;
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = std::max(a.norm(), 1e-300);
  SymmetricEigen out;
  for (int sweep = 0; sweep < 100; ++sweep) {
    // Summed directly; |A|^2 - |diag A|^2 cancels catastrophically near convergence.
    double off2 = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off2 += 2.0 * a(p, q) * a(p, q);
    const double off = std::sqrt(off2);
    if (off <= 1e-15 * scale) break;
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    Eigen::VectorXd col = v.col(order[k]);
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    if (col(big) < 0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw Error(ErrorCode::EmptyDataset, "covariance needs at least 2 rows");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

PcaParams pca_fit(const Dataset& train, Eigen::Index k) {
  if (k < 1 || k > train.cols()) throw Error(ErrorCode::InvalidK, "k must be in [1, n]");
  if (train.rows() < 2) throw Error(ErrorCode::EmptyDataset, "PCA needs at least 2 rows");
  const SymmetricEigen eig = jacobi_eigen(covariance(train.features));
  PcaParams p;
  p.mean = train.features.colwise().mean().transpose();
  p.components = eig.vectors.leftCols(k);
  p.explained_variance = eig.values.head(k);
  return p;
}

Dataset pca_apply(const PcaParams& params, const Dataset& ds) {
  if (params.mean.size() != ds.cols()) throw Error(ErrorCode::DimensionMismatch, "PCA dims differ");
  Dataset out;
  out.features = (ds.features.rowwise() - params.mean.transpose()) * params.components;
  out.labels = ds.labels;
  for (Eigen::Index j = 0; j < params.k(); ++j) out.feature_names.push_back("PC" + std::to_string(j + 1));
  return out;
}

Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1))
    throw Error(ErrorCode::InvalidParams, "test fraction must be in (0, 1)");
  const auto m = static_cast<std::size_t>(ds.rows());
  const auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(m) * test_fraction - 1e-9));
  if (n_test == 0 || n_test >= m) throw Error(ErrorCode::DegenerateSplit, "split leaves an empty side");

  std::vector<Eigen::Index> perm(m);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Eigen::Index>(perm));

  Split s;
  s.test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test_rows.begin(), s.test_rows.end());
  std::sort(s.train_rows.begin(), s.train_rows.end());
  s.train = select_rows(ds, s.train_rows);
  s.test = select_rows(ds, s.test_rows);
  if (s.train.count(0) == 0 || s.train.count(1) == 0)
    throw Error(ErrorCode::DegenerateSplit, "training split lost a class");
  return s;
}

}  // namespace mpa
