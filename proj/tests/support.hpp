#pragma once

#include "lowrank/measurements.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace testing {

using lowrank::Mat;
using lowrank::Vec;

inline Mat random_matrix(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Mat X(n, n);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = nd(gen);
  return X;
}

inline Mat random_rank(std::mt19937_64& gen, Eigen::Index n, Eigen::Index r) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd G(n, r), H(n, r);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = nd(gen);
  for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = nd(gen);
  return G * H.transpose();
}

/// Singular values from the symmetric eigenproblem of X^T X, nonincreasing.
inline Vec eigen_singular_values(const Mat& X) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(X.transpose() * X));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  return ev;
}

inline double eigen_schatten_power(const Mat& X, double p) {
  const Vec s = eigen_singular_values(X);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += s[i] > 0.0 ? std::pow(s[i], p) : 0.0;
  return acc;
}

/// Independent loop over the payload: y_i = sum_jk A_i[j,k] X[j,k].
inline Vec naive_apply(const lowrank::MeasurementOperator& A, const Mat& X) {
  const std::size_t n = A.n();
  Vec y = Vec::Zero(static_cast<Eigen::Index>(A.m()));
  for (std::size_t i = 0; i < A.m(); ++i) {
    const Mat Ai = A.sensing_matrix(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        acc += Ai(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
               X(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    y[static_cast<Eigen::Index>(i)] = acc;
  }
  return y;
}

/// Projected subgradient for min ||Z||_{S_1} s.t. A(Z) = y, in kernel
/// coordinates from a complete orthogonal decomposition. Constant steps that
/// halve every epoch; returns the best objective seen.
inline double subgradient_nuclear_oracle(const lowrank::MeasurementOperator& A, const Vec& y,
                                         std::size_t iterations) {
  const auto n = static_cast<Eigen::Index>(A.n());
  const Eigen::MatrixXd M = A.dense_matrix();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  const Eigen::VectorXd z0 = cod.solve(y);
  // Kernel basis: orthonormal complement of the row space.
  Eigen::JacobiSVD<Eigen::MatrixXd> sv(M, Eigen::ComputeFullV);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.singularValues().size(); ++i)
    if (sv.singularValues()[i] > 1e-10 * sv.singularValues()[0]) ++rank;
  const Eigen::MatrixXd K = sv.matrixV().rightCols(n * n - rank);

  auto nuclear = [&](const Eigen::VectorXd& z) {
    const Mat Z = Eigen::Map<const Mat>(z.data(), n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> s(Z);
    return s.singularValues().sum();
  };
  Eigen::VectorXd c = Eigen::VectorXd::Zero(K.cols());
  double best = nuclear(z0);
  if (K.cols() == 0) return best;
  double step = 0.1 * std::max(best, 1e-12);
  const std::size_t epochs = 24;
  const std::size_t per_epoch = std::max<std::size_t>(1, iterations / epochs);
  Eigen::VectorXd best_c = c;
  for (std::size_t e = 0; e < epochs; ++e) {
    c = best_c;
    for (std::size_t it = 0; it < per_epoch; ++it) {
      const Eigen::VectorXd z = z0 + K * c;
      const Mat Z = Eigen::Map<const Mat>(z.data(), n, n);
      Eigen::JacobiSVD<Eigen::MatrixXd> s(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double f = s.singularValues().sum();
      if (f < best) {
        best = f;
        best_c = c;
      }
      const Mat G = s.matrixU() * s.matrixV().transpose();
      const Eigen::VectorXd g = K.transpose() * Eigen::Map<const Eigen::VectorXd>(G.data(), n * n);
      const double gn = g.norm();
      if (gn < 1e-15) break;
      c -= step * g / gn;
    }
    step *= 0.5;
  }
  return best;
}

}  // namespace testing
