#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mpa/error.hpp"
#include "mpa/geometry.hpp"
#include "mpa/rng.hpp"

namespace mpa {

template <typename Scalar = double>
struct MpaConfig {
  Scalar eta{0.00005};
  int epochs{150};
  /// Proximity threshold for the overfit guard. Unset means 0.1 times the
  /// initial spacing of the moving points.
  std::optional<Scalar> alpha;
  Scalar near_cluster_percentile{50};
  Scalar init_spread{0.5};
  std::uint64_t seed{0};
  bool early_stop{true};

  void validate() const {
    if (!(eta > 0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidParams, "eta must be > 0");
    if (epochs < 1) throw Error(ErrorCode::InvalidParams, "epochs must be >= 1");
    if (alpha && !(*alpha >= 0)) throw Error(ErrorCode::InvalidParams, "alpha must be >= 0");
    if (!(near_cluster_percentile > 0 && near_cluster_percentile <= 100))
      throw Error(ErrorCode::InvalidParams, "near-cluster percentile must be in (0, 100]");
    if (!(init_spread > 0) || !std::isfinite(init_spread))
      throw Error(ErrorCode::InvalidParams, "init_spread must be > 0");
  }
};

/// Sign assigned to class 0 and class 1.
using PseudoSign = std::array<int, 2>;

/// Boundary through the moving points. The 2-D case uses the closed-form
/// line; every other dimension goes through the cofactor expansion.
template <typename Derived>
Hyperplane<typename Derived::Scalar> boundary_through(const Eigen::MatrixBase<Derived>& points) {
  if (points.cols() == 2 && points.rows() == 2)
    return line_from_points(points.row(0).transpose(), points.row(1).transpose());
  return hyperplane_from_points(points);
}

template <typename Scalar = double>
class MpaModel {
 public:
  MpaModel(Matrix<Scalar> moving_points, PseudoSign pseudo, MpaConfig<Scalar> config)
      : points_(std::move(moving_points)), pseudo_(pseudo), config_(std::move(config)) {
    if (points_.rows() != points_.cols() || points_.rows() < 2)
      throw Error(ErrorCode::DimensionMismatch, "model needs n moving points of dimension n >= 2");
    if (!((pseudo_[0] == -1 && pseudo_[1] == 1) || (pseudo_[0] == 1 && pseudo_[1] == -1)))
      throw Error(ErrorCode::InvalidParams, "pseudo signs must be opposite");
    if (!config_.alpha) throw Error(ErrorCode::InvalidParams, "model config needs a resolved alpha");
    config_.validate();
    hyperplane_ = boundary_through(points_);
  }

  Eigen::Index dim() const { return points_.cols(); }
  const Matrix<Scalar>& moving_points() const { return points_; }
  const Hyperplane<Scalar>& hyperplane() const { return hyperplane_; }
  const PseudoSign& pseudo_sign() const { return pseudo_; }
  const MpaConfig<Scalar>& config() const { return config_; }
  Scalar alpha() const { return *config_.alpha; }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  void set_feature_names(std::vector<std::string> names) { feature_names_ = std::move(names); }

  /// Displaces moving point `index` by `t`. A move that leaves the points
  /// affinely degenerate is undone and reported as false.
  template <typename Derived>
  bool move_point(Eigen::Index index, const Eigen::MatrixBase<Derived>& t) {
    const Vector<Scalar> previous = points_.row(index).transpose();
    points_.row(index) += t.transpose();
    try {
      if (!points_.allFinite()) throw Error(ErrorCode::DegeneratePoints, "non-finite move");
      hyperplane_ = boundary_through(points_);
    } catch (const Error&) {
      points_.row(index) = previous.transpose();
      return false;
    }
    return true;
  }

 private:
  Matrix<Scalar> points_;
  PseudoSign pseudo_;
  MpaConfig<Scalar> config_;
  Hyperplane<Scalar> hyperplane_;
  std::vector<std::string> feature_names_;
};

/// Per-class subset of training rows close to the class mean.
template <typename Scalar = double>
struct NearCluster {
  std::array<Vector<Scalar>, 2> mean;
  std::array<Scalar, 2> radius{};
  std::array<std::vector<Eigen::Index>, 2> members;
};

namespace detail {

inline void check_labels(std::span<const int> labels, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(labels.size()) != rows)
    throw Error(ErrorCode::LengthMismatch, "label count differs from row count");
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::NonBinaryLabels, "labels must be 0 or 1");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw Error(ErrorCode::NonBinaryLabels, "both classes must be present");
}

template <typename Scalar>
Matrix<Scalar> rows_of_class(const Matrix<Scalar>& x, std::span<const int> labels, int cls) {
  const auto count = std::count(labels.begin(), labels.end(), cls);
  Matrix<Scalar> out(count, x.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (labels[i] == cls) out.row(r++) = x.row(i);
  return out;
}

}  // namespace detail

/// Class means, the percentile radius (nearest-rank) of member distances to
/// the mean, and the rows inside that radius.
template <typename Scalar>
NearCluster<Scalar> near_clusters(const Matrix<Scalar>& x, std::span<const int> labels, Scalar percentile) {
  detail::check_labels(labels, x.rows());
  if (!(percentile > 0 && percentile <= 100))
    throw Error(ErrorCode::InvalidParams, "percentile must be in (0, 100]");
  NearCluster<Scalar> nc;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    Vector<Scalar> mean = Vector<Scalar>::Zero(x.cols());
    for (auto i : idx) mean += x.row(i).transpose();
    mean /= Scalar(idx.size());

    std::vector<Scalar> dist(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) dist[k] = (x.row(idx[k]).transpose() - mean).norm();
    std::vector<Scalar> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / Scalar(100) * Scalar(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    const Scalar radius = sorted[rank - 1];

    for (std::size_t k = 0; k < idx.size(); ++k)
      if (dist[k] <= radius) nc.members[cls].push_back(idx[k]);
    nc.mean[cls] = std::move(mean);
    nc.radius[cls] = radius;
  }
  return nc;
}

/// Sign of each class mean's displacement from h.
template <typename Scalar, typename D0, typename D1>
PseudoSign assign_pseudo(const Hyperplane<Scalar>& h, const Eigen::MatrixBase<D0>& mu0,
                         const Eigen::MatrixBase<D1>& mu1) {
  const int s0 = region_sign(h, mu0);
  const int s1 = region_sign(h, mu1);
  if (s0 == 0 || s1 == 0) throw Error(ErrorCode::MeanOnBoundary, "a class mean lies on the boundary");
  if (s0 == s1) throw Error(ErrorCode::SameSideMeans, "both class means lie on the same side");
  return {s0, s1};
}

/// Places the moving points on the hyperplane through the midpoint of the
/// class means, orthogonal to the segment joining them.
template <typename Scalar>
MpaModel<Scalar> initialize(const Matrix<Scalar>& class0, const Matrix<Scalar>& class1,
                            const MpaConfig<Scalar>& cfg) {
  cfg.validate();
  if (class0.rows() == 0 || class1.rows() == 0)
    throw Error(ErrorCode::NonBinaryLabels, "both classes must be non-empty");
  const Eigen::Index n = class0.cols();
  if (class1.cols() != n) throw Error(ErrorCode::DimensionMismatch, "class dims differ");
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "need at least 2 features");

  const Vector<Scalar> mu0 = class0.colwise().mean().transpose();
  const Vector<Scalar> mu1 = class1.colwise().mean().transpose();
  const Vector<Scalar> diff = mu1 - mu0;
  const Scalar gap = diff.norm();
  const Scalar scale = std::max(mu0.cwiseAbs().maxCoeff(), mu1.cwiseAbs().maxCoeff());
  if (!(gap > Scalar(kDegenerateEps) * std::max(scale, Scalar(1))))
    throw Error(ErrorCode::IdenticalMeans, "class means coincide");

  // Gram-Schmidt over e_1..e_n against the mean direction.
  std::vector<Vector<Scalar>> basis{diff / gap};
  for (Eigen::Index k = 0; k < n && static_cast<Eigen::Index>(basis.size()) < n; ++k) {
    Vector<Scalar> v = Vector<Scalar>::Unit(n, k);
    for (const auto& b : basis) v -= b.dot(v) * b;
    const Scalar norm = v.norm();
    if (norm < Scalar(1e-3)) continue;
    basis.push_back(v / norm);
  }

  const Scalar spread = cfg.init_spread * gap;
  const Vector<Scalar> mid = (mu0 + mu1) / Scalar(2);
  Matrix<Scalar> points(n, n);
  points.row(0) = mid.transpose();
  for (Eigen::Index i = 1; i < n; ++i) points.row(i) = (mid + spread * basis[i]).transpose();

  MpaConfig<Scalar> resolved = cfg;
  if (!resolved.alpha) resolved.alpha = Scalar(0.1) * spread;

  const PseudoSign pseudo = assign_pseudo(boundary_through(points), mu0, mu1);
  return MpaModel<Scalar>(std::move(points), pseudo, std::move(resolved));
}

template <typename Scalar>
MpaModel<Scalar> initialize(const Matrix<Scalar>& x, std::span<const int> labels, const MpaConfig<Scalar>& cfg) {
  detail::check_labels(labels, x.rows());
  return initialize(detail::rows_of_class(x, labels, 0), detail::rows_of_class(x, labels, 1), cfg);
}

/// Signed displacement times the pseudo sign of `label`; negative iff x is
/// on the wrong side.
template <typename Scalar, typename Derived>
Scalar lambda_value(const MpaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x, int label) {
  if (label != 0 && label != 1) throw Error(ErrorCode::NonBinaryLabels, "label must be 0 or 1");
  return signed_displacement(model.hyperplane(), x) * Scalar(model.pseudo_sign()[label]);
}

template <typename Scalar>
struct Movement {
  Eigen::Index mover;
  Vector<Scalar> t;
};

/// Proposed move for misclassified point q given a sample g from the
/// opposite class's near cluster: the moving point c closest to q travels
/// |eta * lambda| along (g - q) - (c - q) = g - c.
template <typename Scalar, typename DQ, typename DG>
Movement<Scalar> movement_vector(const MpaModel<Scalar>& model, const Eigen::MatrixBase<DQ>& q,
                                 const Eigen::MatrixBase<DG>& g, Scalar lambda, Scalar eta) {
  if (q.size() != model.dim() || g.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch, "point and model dims differ");
  if (!(lambda < 0)) throw Error(ErrorCode::InvalidParams, "movement requested for a correct point");
  if (!(eta > 0)) throw Error(ErrorCode::InvalidParams, "eta must be > 0");

  const auto& points = model.moving_points();
  Eigen::Index mover = 0;
  Scalar best = (points.row(0).transpose() - q).squaredNorm();
  for (Eigen::Index i = 1; i < points.rows(); ++i) {
    const Scalar d = (points.row(i).transpose() - q).squaredNorm();
    if (d < best) {
      best = d;
      mover = i;
    }
  }

  const Vector<Scalar> c = points.row(mover).transpose();
  const Vector<Scalar> u = c - q;
  const Vector<Scalar> w = g - q;
  const Vector<Scalar> v = w - u;
  const Scalar scale = std::max(c.cwiseAbs().maxCoeff(), g.cwiseAbs().maxCoeff());
  const Scalar vnorm = v.norm();
  if (!(vnorm > Scalar(kDegenerateEps) * scale))
    throw Error(ErrorCode::ZeroDisplacement, "sample coincides with the moving point");
  return {mover, (v / vnorm) * std::abs(eta * lambda)};
}

/// Removes the component of `t` that carries moving point `mover` toward
/// any other moving point within `alpha` of it. Moves that already point
/// away from every close neighbour are returned unchanged.
template <typename Scalar, typename Derived>
Vector<Scalar> overfit_guard(const Matrix<Scalar>& points, Eigen::Index mover,
                             const Eigen::MatrixBase<Derived>& t, Scalar alpha) {
  Vector<Scalar> out = t;
  const Vector<Scalar> e = points.row(mover).transpose();
  std::vector<Vector<Scalar>> approach;
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if (j == mover) continue;
    const Vector<Scalar> r = points.row(j).transpose() - e;
    const Scalar dist = r.norm();
    if (dist <= alpha && dist > Scalar(0)) approach.push_back(r / dist);
  }
  if (approach.empty()) return out;

  auto violated = [&](const Vector<Scalar>& v) {
    return std::any_of(approach.begin(), approach.end(),
                       [&](const Vector<Scalar>& r) { return v.dot(r) > Scalar(1e-12); });
  };

  // Cyclic projection onto each half-space t.r <= 0.
  for (int pass = 0; pass < 64; ++pass) {
    bool changed = false;
    for (const auto& r : approach) {
      const Scalar along = out.dot(r);
      if (along > Scalar(0)) {
        out -= along * r;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (violated(out)) {
    // Nearly parallel neighbours can stall the cyclic passes; drop every
    // component in their span instead.
    Matrix<Scalar> dirs(out.size(), static_cast<Eigen::Index>(approach.size()));
    for (std::size_t k = 0; k < approach.size(); ++k) dirs.col(static_cast<Eigen::Index>(k)) = approach[k];
    Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(dirs);
    const Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(out.size(), qr.rank());
    out -= q * (q.transpose() * out);
  }
  return out;
}

template <typename Scalar, typename Derived>
Vector<Scalar> overfit_guard(const MpaModel<Scalar>& model, Eigen::Index mover,
                             const Eigen::MatrixBase<Derived>& t, Scalar alpha) {
  return overfit_guard(model.moving_points(), mover, t, alpha);
}

template <typename Scalar = double>
struct TrainingLog {
  /// Misclassified examples met during each epoch.
  std::vector<std::size_t> misclassified;
  /// Moving points before training and after every epoch.
  std::vector<Matrix<Scalar>> trajectory;
  std::size_t moves_applied{0};
  std::size_t moves_reverted{0};
  std::size_t moves_skipped{0};
};

/// Trains the moving points in place.
template <typename Scalar>
TrainingLog<Scalar> fit(MpaModel<Scalar>& model, const Matrix<Scalar>& x, std::span<const int> labels,
                        const MpaConfig<Scalar>& cfg) {
  cfg.validate();
  detail::check_labels(labels, x.rows());
  if (x.cols() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "data and model dims differ");
  const Scalar alpha = cfg.alpha.value_or(model.alpha());

  const NearCluster<Scalar> clusters = near_clusters(x, labels, cfg.near_cluster_percentile);
  Rng rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainingLog<Scalar> log;
  log.trajectory.push_back(model.moving_points());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    std::size_t missed = 0;
    for (const Eigen::Index i : order) {
      const auto q = x.row(i).transpose();
      const Scalar lambda = lambda_value(model, q, labels[i]);
      if (!(lambda < 0)) continue;
      ++missed;

      const auto& pool = clusters.members[1 - labels[i]];
      std::optional<Movement<Scalar>> move;
      for (int attempt = 0; attempt < 8 && !move; ++attempt) {
        const auto g = x.row(pool[rng.below(pool.size())]).transpose();
        try {
          move = movement_vector(model, q, g, lambda, cfg.eta);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::ZeroDisplacement) throw;
        }
      }
      if (!move) {
        ++log.moves_skipped;
        continue;
      }
      const Vector<Scalar> t = overfit_guard(model, move->mover, move->t, alpha);
      if (model.move_point(move->mover, t))
        ++log.moves_applied;
      else
        ++log.moves_reverted;
    }
    log.misclassified.push_back(missed);
    log.trajectory.push_back(model.moving_points());
    if (cfg.early_stop && missed == 0) break;
  }
  return log;
}

/// Class whose pseudo sign matches the side of x; boundary points go to
/// the class with pseudo sign +1.
template <typename Scalar, typename Derived>
int predict(const MpaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  int side = region_sign(model.hyperplane(), x);
  if (side == 0) side = 1;
  return model.pseudo_sign()[0] == side ? 0 : 1;
}

template <typename Scalar>
std::vector<int> predict_rows(const MpaModel<Scalar>& model, const Matrix<Scalar>& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(model, x.row(i).transpose());
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text model document.
//
//   mpa-model 1
//   dim <n>
//   pseudo_sign <s0> <s1>
//   point <x1> ... <xn>          (n lines)
//   eta <v>
//   epochs <v>
//   alpha <v>
//   near_cluster_percentile <v>
//   init_spread <v>
//   seed <v>
//   early_stop <0|1>
//   features\t<name>\t...        (optional, tab separated)
//
// Reals are written in shortest round-trip form, so parsing restores them
// bit for bit.

namespace detail {

template <typename Scalar>
std::string format_real(Scalar v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Scalar>
Scalar parse_real(const std::string& token) {
  Scalar v{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError, "bad number '" + token + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& token) {
  Int v{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError, "bad integer '" + token + "'");
  return v;
}

}  // namespace detail

template <typename Scalar>
std::string to_text(const MpaModel<Scalar>& model) {
  std::ostringstream out;
  const auto& cfg = model.config();
  out << "mpa-model 1\n";
  out << "dim " << model.dim() << "\n";
  out << "pseudo_sign " << model.pseudo_sign()[0] << " " << model.pseudo_sign()[1] << "\n";
  for (Eigen::Index i = 0; i < model.dim(); ++i) {
    out << "point";
    for (Eigen::Index j = 0; j < model.dim(); ++j) out << " " << detail::format_real(model.moving_points()(i, j));
    out << "\n";
  }
  out << "eta " << detail::format_real(cfg.eta) << "\n";
  out << "epochs " << cfg.epochs << "\n";
  out << "alpha " << detail::format_real(model.alpha()) << "\n";
  out << "near_cluster_percentile " << detail::format_real(cfg.near_cluster_percentile) << "\n";
  out << "init_spread " << detail::format_real(cfg.init_spread) << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "early_stop " << (cfg.early_stop ? 1 : 0) << "\n";
  if (!model.feature_names().empty()) {
    out << "features";
    for (const auto& name : model.feature_names()) out << "\t" << name;
    out << "\n";
  }
  return out.str();
}

template <typename Scalar = double>
MpaModel<Scalar> from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string key;
  auto next_line = [&](const char* expected) {
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, std::string("missing '") + expected + "'");
    std::istringstream ls(line);
    ls >> key;
    if (key != expected) throw Error(ErrorCode::ParseError, "expected '" + std::string(expected) + "', got '" + key + "'");
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    return tokens;
  };
  auto single = [&](const char* expected) {
    auto tokens = next_line(expected);
    if (tokens.size() != 1) throw Error(ErrorCode::ParseError, std::string("'") + expected + "' takes one value");
    return tokens[0];
  };

  if (single("mpa-model") != "1") throw Error(ErrorCode::ParseError, "unsupported model version");
  const long dim = detail::parse_int<long>(single("dim"));
  if (dim < 2) throw Error(ErrorCode::ParseError, "dim must be >= 2");
  auto ps = next_line("pseudo_sign");
  if (ps.size() != 2) throw Error(ErrorCode::ParseError, "pseudo_sign takes two values");
  const PseudoSign pseudo{detail::parse_int<int>(ps[0]), detail::parse_int<int>(ps[1])};

  Matrix<Scalar> points(dim, dim);
  for (long i = 0; i < dim; ++i) {
    auto coords = next_line("point");
    if (static_cast<long>(coords.size()) != dim) throw Error(ErrorCode::ParseError, "point has wrong dimension");
    for (long j = 0; j < dim; ++j) points(i, j) = detail::parse_real<Scalar>(coords[j]);
  }

  MpaConfig<Scalar> cfg;
  cfg.eta = detail::parse_real<Scalar>(single("eta"));
  cfg.epochs = detail::parse_int<int>(single("epochs"));
  cfg.alpha = detail::parse_real<Scalar>(single("alpha"));
  cfg.near_cluster_percentile = detail::parse_real<Scalar>(single("near_cluster_percentile"));
  cfg.init_spread = detail::parse_real<Scalar>(single("init_spread"));
  cfg.seed = detail::parse_int<std::uint64_t>(single("seed"));
  cfg.early_stop = single("early_stop") == "1";

  MpaModel<Scalar> model(std::move(points), pseudo, cfg);
  if (std::getline(in, line) && !line.empty()) {
    std::istringstream ls(line);
    std::getline(ls, key, '\t');
    if (key != "features") throw Error(ErrorCode::ParseError, "unexpected '" + key + "'");
    std::vector<std::string> names;
    for (std::string tok; std::getline(ls, tok, '\t');) names.push_back(tok);
    model.set_feature_names(std::move(names));
  }
  return model;
}

}  // namespace mpa
