#pragma once

// Singular value machinery on M_N: Schatten and weak-Schatten quasi-norms,
// spectral truncation, and the block decompositions of a perturbation Z
// relative to the SVD frame of a reference matrix X.

#include "lowrank/types.hpp"

#include <limits>
#include <vector>

namespace lowrank {

/// Pass as `p` to request the operator norm.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative threshold below which singular values count as exact zeros.
inline constexpr double kRankTolerance = 1e-12;

struct SvdFactors {
  Mat u;      ///< orthogonal, N x N
  Vec sigma;  ///< nonincreasing, nonnegative
  Mat v;      ///< orthogonal, N x N

  Eigen::Index size() const { return sigma.size(); }
  Mat reconstruct() const;
};

SvdFactors svd(const Mat& X);

/// Singular values only (nonincreasing).
Vec singular_values(const Mat& X);

/// (sum sigma_i^p)^{1/p}; sigma_1 when p is kInfinity.
double schatten_norm(const Mat& X, double p);
double schatten_norm_of(const Vec& sigma, double p);

/// sum sigma_i^p, the p-th power of the quasi-norm. Requires finite p.
double schatten_power(const Mat& X, double p);
double schatten_power_of(const Vec& sigma, double p);

/// max_k k^{1/p} sigma*_k.
double weak_schatten_norm(const Mat& X, double p);
double weak_schatten_norm_of(const Vec& sigma, double p);

/// Best rank-s approximation X_[s] = U diag(sigma_1..sigma_s, 0..) V^T.
Mat spectral_truncate(const Mat& X, Eigen::Index s);

/// rho_s(X)_{S_p} = ||X - X_[s]||_{S_p}.
double best_rank_error(const Mat& X, Eigen::Index s, double p);
double best_rank_error_of(const Vec& sigma, Eigen::Index s, double p);

/// Number of singular values above kRankTolerance * sigma_1.
Eigen::Index numerical_rank(const Vec& sigma);
Eigen::Index numerical_rank(const Mat& X);

/// Z = head + tail, split at index s in the SVD frame of X. The tail lives in
/// the bottom-right (N-s) x (N-s) block of U^T Z V; the head has rank <= 2s.
struct BlockSplit {
  Mat head;
  Mat tail;
  Eigen::Index s = 0;
};

BlockSplit block_split(const Mat& Z, const SvdFactors& frame, Eigen::Index s);

/// The tail of a BlockSplit cut into pieces of rank <= t following the
/// nonincreasing singular values of its inner block: block k carries
/// lambda_{(k-1)t+1} .. lambda_{kt}.
struct TailBlocks {
  std::vector<Mat> blocks;
  std::vector<Vec> block_sigma;  ///< singular values carried by each block
  Eigen::Index t = 0;
};

TailBlocks tail_blocks(const Mat& tail, const SvdFactors& frame, Eigen::Index s, Eigen::Index t);

}  // namespace lowrank
