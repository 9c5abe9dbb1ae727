#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace lowrank {

/// Dense N x N real matrix. Row-major so that the flat buffer is vec(X).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

/// Throws InputError unless X is square with finite entries.
void require_square_finite(const Mat& X, const char* what = "matrix");

/// Throws InputError unless every entry of v is finite.
void require_finite(const Vec& v, const char* what = "vector");

inline std::span<const double> flat(const Mat& X) {
  return {X.data(), static_cast<std::size_t>(X.size())};
}

inline std::span<double> flat(Mat& X) {
  return {X.data(), static_cast<std::size_t>(X.size())};
}

/// Trace inner product <X, Y> = trace(X^T Y).
inline double trace_inner(const Mat& X, const Mat& Y) {
  return X.cwiseProduct(Y).sum();
}

}  // namespace lowrank
