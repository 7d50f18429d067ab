#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpa/error.hpp"

namespace mpa {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Relative tolerance below which a point set or normal vector counts as
/// degenerate. Scaled by the largest absolute input coordinate.
inline constexpr double kDegenerateEps = 1e-9;

/// Relative tolerance for the on-plane set of region_sign. Scaled by the
/// magnitude of the terms of w.x + b.
inline constexpr double kOnPlaneEps = 1e-12;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Decision surface w.x + b = 0. No normalization is imposed on (w, b).
template <typename Scalar>
struct Hyperplane {
  Vector<Scalar> weights;
  Scalar bias{0};

  Hyperplane() = default;

  Hyperplane(Vector<Scalar> w, Scalar b) : weights(std::move(w)), bias(b) {
    if (weights.size() < 1) throw Error(ErrorCode::InvalidParams, "hyperplane needs dim >= 1");
    if (!weights.allFinite() || !std::isfinite(bias))
      throw Error(ErrorCode::InvalidParams, "hyperplane coefficients must be finite");
    const Scalar magnitude = std::max(weights.cwiseAbs().maxCoeff(), std::abs(bias));
    if (!(weights.norm() > Scalar(kDegenerateEps) * magnitude) || weights.norm() == Scalar(0))
      throw Error(ErrorCode::DegeneratePoints, "hyperplane normal vanishes");
  }

  Eigen::Index dim() const { return weights.size(); }

  template <typename Derived>
  Scalar evaluate(const Eigen::MatrixBase<Derived>& x) const {
    return weights.dot(x) + bias;
  }
};

/// Determinant by Gaussian elimination with partial pivoting.
template <typename Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw Error(ErrorCode::DimensionMismatch, "determinant of a non-square matrix");
  Matrix<Scalar> a = input;
  Scalar det{1};
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    a.col(col).tail(n - col).cwiseAbs().maxCoeff(&pivot);
    pivot += col;
    if (a(pivot, col) == Scalar(0)) return Scalar(0);
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      det = -det;
    }
    det *= a(col, col);
    for (Eigen::Index row = col + 1; row < n; ++row) {
      const Scalar factor = a(row, col) / a(col, col);
      a.row(row).tail(n - col) -= factor * a.row(col).tail(n - col);
    }
  }
  return det;
}

/// Line through two points in the plane: A x + B y + C = 0 with
/// A = y1 - y2, B = x2 - x1, C = x1 y2 - x2 y1.
template <typename DerivedE, typename DerivedF>
Hyperplane<typename DerivedE::Scalar> line_from_points(const Eigen::MatrixBase<DerivedE>& e,
                                                       const Eigen::MatrixBase<DerivedF>& f) {
  using Scalar = typename DerivedE::Scalar;
  if (e.size() != 2 || f.size() != 2)
    throw Error(ErrorCode::DimensionMismatch, "line_from_points takes two 2-D points");
  if (!e.allFinite() || !f.allFinite()) throw Error(ErrorCode::InvalidParams, "non-finite coordinate");
  const Scalar scale = std::max(e.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff());
  if (!((e - f).norm() > Scalar(kDegenerateEps) * scale))
    throw Error(ErrorCode::DegeneratePoints, "the two points coincide");
  const Scalar x1 = e(0), y1 = e(1), x2 = f(0), y2 = f(1);
  Vector<Scalar> w(2);
  w << y1 - y2, x2 - x1;
  return Hyperplane<Scalar>(std::move(w), x1 * y2 - x2 * y1);
}

/// Hyperplane through n points of dimension n (one point per row).
///
/// Expands det([x, 1; P, 1]) = 0 along its first row: the weight of x_j is
/// (-1)^j times the minor with column j removed, and the constant is
/// (-1)^n times the minor with the ones column removed.
template <typename Derived>
Hyperplane<typename Derived::Scalar> hyperplane_from_points(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  if (n < 1 || points.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "need exactly n points of dimension n");
  if (!points.allFinite()) throw Error(ErrorCode::InvalidParams, "non-finite coordinate");

  Matrix<Scalar> augmented(n, n + 1);
  augmented.leftCols(n) = points;
  augmented.col(n).setOnes();

  Vector<Scalar> cofactors(n + 1);
  Matrix<Scalar> minor(n, n);
  for (Eigen::Index skip = 0; skip <= n; ++skip) {
    minor.leftCols(skip) = augmented.leftCols(skip);
    minor.rightCols(n - skip) = augmented.rightCols(n - skip);
    const Scalar sign = (skip % 2 == 0) ? Scalar(1) : Scalar(-1);
    cofactors(skip) = sign * determinant(minor);
  }

  // The weights are translation invariant, so the degeneracy test is taken
  // relative to the spread of the points rather than their magnitude.
  const Scalar scale = (points.rowwise() - points.colwise().mean()).cwiseAbs().maxCoeff();
  const Vector<Scalar> weights = cofactors.head(n);
  if (!(weights.norm() > Scalar(kDegenerateEps) * std::pow(scale, Scalar(n - 1))))
    throw Error(ErrorCode::DegeneratePoints, "points are affinely dependent");
  return Hyperplane<Scalar>(weights, cofactors(n));
}

/// (w.x + b) / |w|, sign retained.
template <typename Scalar, typename Derived>
Scalar signed_displacement(const Hyperplane<Scalar>& h, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != h.dim()) throw Error(ErrorCode::DimensionMismatch, "point and hyperplane dims differ");
  return h.evaluate(x) / h.weights.norm();
}

/// -1, 0 or +1 according to the side of h that x lies on.
template <typename Scalar, typename Derived>
int region_sign(const Hyperplane<Scalar>& h, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != h.dim()) throw Error(ErrorCode::DimensionMismatch, "point and hyperplane dims differ");
  const Scalar value = h.evaluate(x);
  const Scalar scale = std::abs(h.bias) + h.weights.cwiseProduct(x).cwiseAbs().sum();
  if (std::abs(value) <= Scalar(kOnPlaneEps) * scale) return 0;
  return value > Scalar(0) ? 1 : -1;
}

/// Angle in [0, pi] between two non-zero vectors.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar angle_between(const Eigen::MatrixBase<DerivedU>& u,
                                        const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "vector dims differ");
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (!(nu > Scalar(kDegenerateEps)) || !(nv > Scalar(kDegenerateEps)))
    throw Error(ErrorCode::ZeroVector, "angle of a zero vector");
  const Scalar c = std::clamp(u.dot(v) / (nu * nv), Scalar(-1), Scalar(1));
  return std::acos(c);
}

}  // namespace mpa
