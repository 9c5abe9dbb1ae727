#include "lowrank/schatten.hpp"

#include "lowrank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowrank {

namespace {

void require_p(double p) {
  if (!(p > 0.0)) throw ParameterError("p", "must be positive, got " + std::to_string(p));
}

void require_rank_index(Eigen::Index s, Eigen::Index n, const char* field = "s") {
  if (s < 0 || s > n) {
    throw ParameterError(field, "must lie in [0, " + std::to_string(n) + "], got " +
                                    std::to_string(s));
  }
}

// Values at the rounding floor of the factorization are exact zeros; for
// p < 1 they would otherwise contribute (1e-16)^p to every power sum.
Vec clean(Vec sigma) {
  const double top = sigma.size() > 0 ? sigma.maxCoeff() : 0.0;
  for (double& v : sigma) {
    if (v <= kRankTolerance * top) v = 0.0;
  }
  return sigma;
}

}  // namespace

void require_square_finite(const Mat& X, const char* what) {
  if (X.rows() == 0 || X.rows() != X.cols()) {
    throw InputError(std::string(what) + " must be square and nonempty, got " +
                     std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
  }
  if (!X.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
}

Mat SvdFactors::reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }

SvdFactors svd(const Mat& X) {
  require_square_finite(X);
  Eigen::JacobiSVD<Mat> dec(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {dec.matrixU(), clean(dec.singularValues()), dec.matrixV()};
}

Vec singular_values(const Mat& X) {
  require_square_finite(X);
  Eigen::JacobiSVD<Mat> dec(X);
  return clean(dec.singularValues());
}

double schatten_power_of(const Vec& sigma, double p) {
  require_p(p);
  if (std::isinf(p)) throw ParameterError("p", "power sum undefined for p = inf");
  double acc = 0.0;
  for (double s : sigma) {
    if (s > 0.0) acc += std::pow(s, p);
  }
  return acc;
}

double schatten_norm_of(const Vec& sigma, double p) {
  require_p(p);
  if (std::isinf(p)) return sigma.size() > 0 ? sigma.maxCoeff() : 0.0;
  if (p == 2.0) return sigma.norm();
  if (p == 1.0) return sigma.sum();
  return std::pow(schatten_power_of(sigma, p), 1.0 / p);
}

double schatten_norm(const Mat& X, double p) {
  require_p(p);
  if (p == 2.0) {
    require_square_finite(X);
    return X.norm();
  }
  return schatten_norm_of(singular_values(X), p);
}

double schatten_power(const Mat& X, double p) { return schatten_power_of(singular_values(X), p); }

double weak_schatten_norm_of(const Vec& sigma, double p) {
  require_p(p);
  Vec sorted = sigma;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (std::isinf(p)) return sorted.size() > 0 ? sorted[0] : 0.0;
  double best = 0.0;
  for (Eigen::Index k = 0; k < sorted.size(); ++k) {
    best = std::max(best, std::pow(static_cast<double>(k + 1), 1.0 / p) * sorted[k]);
  }
  return best;
}

double weak_schatten_norm(const Mat& X, double p) {
  require_p(p);
  return weak_schatten_norm_of(singular_values(X), p);
}

Mat spectral_truncate(const Mat& X, Eigen::Index s) {
  require_square_finite(X);
  require_rank_index(s, X.rows());
  if (s == X.rows()) return X;
  if (s == 0) return Mat::Zero(X.rows(), X.cols());
  const SvdFactors f = svd(X);
  return f.u.leftCols(s) * f.sigma.head(s).asDiagonal() * f.v.leftCols(s).transpose();
}

double best_rank_error_of(const Vec& sigma, Eigen::Index s, double p) {
  require_p(p);
  require_rank_index(s, sigma.size());
  const Vec rest = sigma.tail(sigma.size() - s);
  return schatten_norm_of(rest, p);
}

double best_rank_error(const Mat& X, Eigen::Index s, double p) {
  require_p(p);
  require_square_finite(X);
  require_rank_index(s, X.rows());
  return best_rank_error_of(singular_values(X), s, p);
}

Eigen::Index numerical_rank(const Vec& sigma) {
  if (sigma.size() == 0) return 0;
  const double top = sigma.maxCoeff();
  if (top <= 0.0) return 0;
  Eigen::Index r = 0;
  for (double s : sigma) {
    if (s > kRankTolerance * top) ++r;
  }
  return r;
}

Eigen::Index numerical_rank(const Mat& X) { return numerical_rank(singular_values(X)); }

BlockSplit block_split(const Mat& Z, const SvdFactors& frame, Eigen::Index s) {
  require_square_finite(Z, "Z");
  const Eigen::Index n = Z.rows();
  if (frame.size() != n || frame.u.rows() != n || frame.v.rows() != n) {
    throw InputError("block_split: frame size does not match Z");
  }
  if (s < 1 || s >= n) {
    throw ParameterError("s", "must lie in [1, " + std::to_string(n - 1) + "], got " +
                                  std::to_string(s));
  }
  const Mat inner = frame.u.transpose() * Z * frame.v;
  const Eigen::Index r = n - s;
  Mat tail = frame.u.rightCols(r) * inner.bottomRightCorner(r, r) * frame.v.rightCols(r).transpose();
  Mat head = Z - tail;
  return {std::move(head), std::move(tail), s};
}

TailBlocks tail_blocks(const Mat& tail, const SvdFactors& frame, Eigen::Index s, Eigen::Index t) {
  require_square_finite(tail, "tail");
  const Eigen::Index n = tail.rows();
  if (frame.size() != n || frame.u.rows() != n || frame.v.rows() != n) {
    throw InputError("tail_blocks: frame size does not match tail");
  }
  if (s < 1 || s >= n) throw ParameterError("s", "must lie in [1, N-1]");
  if (t < 1) throw ParameterError("t", "must be at least 1");

  const Eigen::Index r = n - s;
  const Mat inner = (frame.u.transpose() * tail * frame.v).bottomRightCorner(r, r);
  Eigen::JacobiSVD<Mat> dec(inner, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat left = frame.u.rightCols(r) * dec.matrixU();
  const Mat right = frame.v.rightCols(r) * dec.matrixV();
  const Vec& lambda = dec.singularValues();

  TailBlocks out;
  out.t = t;
  for (Eigen::Index start = 0; start < r; start += t) {
    const Eigen::Index len = std::min(t, r - start);
    out.blocks.push_back(left.middleCols(start, len) * lambda.segment(start, len).asDiagonal() *
                         right.middleCols(start, len).transpose());
    out.block_sigma.push_back(lambda.segment(start, len));
  }
  return out;
}

}  // namespace lowrank
