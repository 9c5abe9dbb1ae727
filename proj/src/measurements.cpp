#include "lowrank/measurements.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace lowrank {

namespace {

void check_memory(std::size_t n, std::size_t m, double guard_mb) {
  const double mb = static_cast<double>(m) * static_cast<double>(n * n) * 8.0 / (1024.0 * 1024.0);
  if (mb > guard_mb) {
    throw ParameterError("memory_guard_mb", "dense operator needs " + std::to_string(mb) +
                                                " MB, guard is " + std::to_string(guard_mb) + " MB");
  }
}

void check_m(std::size_t n, std::size_t m) {
  if (n == 0) throw ParameterError("n", "must be positive");
  if (m < 1 || m > n * n) {
    throw ParameterError("m", "must lie in [1, " + std::to_string(n * n) + "], got " +
                                  std::to_string(m));
  }
}

void check_dims(const MeasurementOperator& A, const Mat& X) {
  if (static_cast<std::size_t>(X.rows()) != A.n() || static_cast<std::size_t>(X.cols()) != A.n()) {
    throw InputError("matrix is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                     ", operator expects " + std::to_string(A.n()) + "x" + std::to_string(A.n()));
  }
}

}  // namespace

std::string to_string(OperatorKind kind) {
  return kind == OperatorKind::gaussian_dense ? "gaussian-dense" : "entry-mask";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "gaussian-dense" || s == "gaussian") return OperatorKind::gaussian_dense;
  if (s == "entry-mask" || s == "mask") return OperatorKind::entry_mask;
  throw ParameterError("kind", "unknown operator kind '" + s + "'");
}

MeasurementOperator MeasurementOperator::dense(std::size_t n, std::vector<double> rows,
                                               std::uint64_t seed, double memory_guard_mb) {
  if (n == 0 || rows.empty() || rows.size() % (n * n) != 0) {
    throw InputError("dense operator payload must hold m rows of length N^2");
  }
  const std::size_t m = rows.size() / (n * n);
  check_m(n, m);
  check_memory(n, m, memory_guard_mb);
  if (!std::all_of(rows.begin(), rows.end(), [](double v) { return std::isfinite(v); })) {
    throw InputError("dense operator payload has non-finite entries");
  }
  MeasurementOperator A;
  A.kind_ = OperatorKind::gaussian_dense;
  A.n_ = n;
  A.m_ = m;
  A.seed_ = seed;
  A.payload_ = std::move(rows);
  return A;
}

MeasurementOperator MeasurementOperator::mask(std::size_t n, std::vector<Index> indices,
                                              double scale) {
  check_m(n, indices.size());
  if (!std::isfinite(scale)) throw ParameterError("scale", "must be finite");
  std::set<Index> seen;
  for (const auto& [i, j] : indices) {
    if (i >= n || j >= n) {
      throw InputError("mask index (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range");
    }
    if (!seen.insert({i, j}).second) {
      throw InputError("duplicate mask index (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  MeasurementOperator A;
  A.kind_ = OperatorKind::entry_mask;
  A.n_ = n;
  A.m_ = indices.size();
  A.scale_ = scale;
  A.indices_ = std::move(indices);
  return A;
}

Mat MeasurementOperator::sensing_matrix(std::size_t i) const {
  if (i >= m_) throw ParameterError("i", "measurement index out of range");
  const auto nn = static_cast<Eigen::Index>(n_);
  if (kind_ == OperatorKind::entry_mask) {
    Mat E = Mat::Zero(nn, nn);
    E(indices_[i].first, indices_[i].second) = scale_;
    return E;
  }
  return Eigen::Map<const Mat>(payload_.data() + i * n_ * n_, nn, nn);
}

Eigen::MatrixXd MeasurementOperator::dense_matrix() const {
  const auto rows = static_cast<Eigen::Index>(m_);
  const auto cols = static_cast<Eigen::Index>(n_ * n_);
  if (kind_ == OperatorKind::entry_mask) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t k = 0; k < m_; ++k) {
      M(static_cast<Eigen::Index>(k),
        static_cast<Eigen::Index>(indices_[k].first * n_ + indices_[k].second)) = scale_;
    }
    return M;
  }
  using RowBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowBlock>(payload_.data(), rows, cols);
}

MeasurementOperator gaussian_operator(std::size_t n, std::size_t m, std::uint64_t seed,
                                      double memory_guard_mb) {
  check_m(n, m);
  check_memory(n, m, memory_guard_mb);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> rows(m * n * n);
  // One stream per measurement row: row i never depends on m or on other rows.
  for (std::size_t i = 0; i < m; ++i) {
    GaussianStream rng(seed, "gaussian-operator", i);
    for (std::size_t k = 0; k < n * n; ++k) rows[i * n * n + k] = rng(stddev);
  }
  return MeasurementOperator::dense(n, std::move(rows), seed, memory_guard_mb);
}

MeasurementOperator entry_mask_operator(std::size_t n,
                                        std::vector<MeasurementOperator::Index> indices,
                                        double scale) {
  return MeasurementOperator::mask(n, std::move(indices), scale);
}

MeasurementOperator full_vectorization(std::size_t n, double scale) {
  std::vector<MeasurementOperator::Index> idx;
  idx.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) idx.emplace_back(i, j);
  }
  return MeasurementOperator::mask(n, std::move(idx), scale);
}

MeasurementOperator random_mask_operator(std::size_t n, std::size_t m, std::uint64_t seed,
                                         double scale) {
  check_m(n, m);
  std::vector<std::size_t> cells(n * n);
  std::iota(cells.begin(), cells.end(), 0);
  GaussianStream rng(seed, "random-mask");
  std::shuffle(cells.begin(), cells.end(), rng.engine());
  cells.resize(m);
  std::sort(cells.begin(), cells.end());
  std::vector<MeasurementOperator::Index> idx;
  for (std::size_t c : cells) idx.emplace_back(c / n, c % n);
  auto A = MeasurementOperator::mask(n, std::move(idx), scale);
  return A;
}

Vec apply(const MeasurementOperator& A, const Mat& X) {
  check_dims(A, X);
  Vec y(static_cast<Eigen::Index>(A.m()));
  if (A.kind() == OperatorKind::entry_mask) {
    for (std::size_t k = 0; k < A.m(); ++k) {
      const auto& [i, j] = A.indices()[k];
      y[static_cast<Eigen::Index>(k)] = A.scale() * X(i, j);
    }
    return y;
  }
  kernels::gemv(A.payload(), A.m(), A.n() * A.n(), flat(X), {y.data(), A.m()});
  return y;
}

Mat adjoint(const MeasurementOperator& A, const Vec& y) {
  if (static_cast<std::size_t>(y.size()) != A.m()) {
    throw InputError("vector has length " + std::to_string(y.size()) + ", operator has m = " +
                     std::to_string(A.m()));
  }
  const auto n = static_cast<Eigen::Index>(A.n());
  Mat X = Mat::Zero(n, n);
  if (A.kind() == OperatorKind::entry_mask) {
    for (std::size_t k = 0; k < A.m(); ++k) {
      const auto& [i, j] = A.indices()[k];
      X(i, j) = A.scale() * y[static_cast<Eigen::Index>(k)];
    }
    return X;
  }
  kernels::gemv_t(A.payload(), A.m(), A.n() * A.n(), {y.data(), A.m()}, flat(X));
  return X;
}

nlohmann::json operator_header(const MeasurementOperator& A) {
  nlohmann::json j{{"kind", to_string(A.kind())}, {"n", A.n()}, {"m", A.m()}, {"seed", A.seed()}};
  if (A.kind() == OperatorKind::entry_mask) {
    j["scale"] = A.scale();
    nlohmann::json idx = nlohmann::json::array();
    for (const auto& [r, c] : A.indices()) idx.push_back({r, c});
    j["indices"] = std::move(idx);
  }
  return j;
}

MeasurementOperator operator_from_header(const nlohmann::json& header,
                                         const std::optional<Eigen::MatrixXd>& payload,
                                         double memory_guard_mb) {
  try {
    const auto kind = operator_kind_from_string(header.at("kind").get<std::string>());
    const auto n = header.at("n").get<std::size_t>();
    const auto m = header.at("m").get<std::size_t>();
    const auto seed = header.value("seed", std::uint64_t{0});
    if (kind == OperatorKind::entry_mask) {
      std::vector<MeasurementOperator::Index> idx;
      for (const auto& pair : header.at("indices")) {
        idx.emplace_back(pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>());
      }
      if (idx.size() != m) throw InputError("operator header: m does not match indices");
      return MeasurementOperator::mask(n, std::move(idx), header.value("scale", 1.0));
    }
    if (payload) {
      if (static_cast<std::size_t>(payload->rows()) != m ||
          static_cast<std::size_t>(payload->cols()) != n * n) {
        throw InputError("operator payload must be m x N^2");
      }
      std::vector<double> rows(m * n * n);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n * n; ++k) {
          rows[i * n * n + k] = (*payload)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
      }
      return MeasurementOperator::dense(n, std::move(rows), seed, memory_guard_mb);
    }
    return gaussian_operator(n, m, seed, memory_guard_mb);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("operator header: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

double gamma_from_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ParameterError("delta", "must lie in [0, 1), got " + std::to_string(delta));
  }
  return (1.0 + delta) / (1.0 - delta);
}

double delta_from_gamma(double gamma) {
  if (!(gamma >= 1.0) || std::isinf(gamma)) {
    throw ParameterError("gamma", "must be finite and at least 1, got " + std::to_string(gamma));
  }
  return (gamma - 1.0) / (gamma + 1.0);
}

namespace {

Mat orthonormal_columns(const Mat& F) {
  Eigen::HouseholderQR<Mat> qr(F);
  return qr.householderQ() * Mat::Identity(F.rows(), F.cols());
}

enum class Extreme { min, max };

// One alternating step. With `right` orthonormal (N x s), finds the factor
// `left` extremizing ||A(left right^T)|| / ||left right^T||_F; the quotient
// is a plain Rayleigh quotient because ||left right^T||_F = ||left||_F.
// When `transposed`, the free factor multiplies from the right instead.
double rayleigh_step(const MeasurementOperator& A, const Mat& fixed, bool transposed,
                     Extreme which, Mat& free) {
  const Eigen::Index n = fixed.rows();
  const Eigen::Index s = fixed.cols();
  Eigen::MatrixXd L(static_cast<Eigen::Index>(A.m()), n * s);
  Mat Z = Mat::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index k = 0; k < s; ++k) {
      Z.setZero();
      if (transposed) {
        Z.col(a) = fixed.col(k);
      } else {
        Z.row(a) = fixed.col(k).transpose();
      }
      L.col(a * s + k) = apply(A, Z);
    }
  }
  const Eigen::MatrixXd K = L.transpose() * L;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  const Eigen::Index pick = which == Extreme::min ? 0 : K.rows() - 1;
  const Eigen::VectorXd g = eig.eigenvectors().col(pick);
  free.resize(n, s);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index k = 0; k < s; ++k) free(a, k) = g[a * s + k];
  }
  return std::sqrt(std::max(0.0, eig.eigenvalues()[pick]));
}

double refine(const MeasurementOperator& A, Mat G, Mat H, std::size_t iters, Extreme which,
              double start) {
  double best = start;
  for (std::size_t it = 0; it < iters; ++it) {
    H = orthonormal_columns(H);
    double r = rayleigh_step(A, H, false, which, G);
    best = which == Extreme::min ? std::min(best, r) : std::max(best, r);
    G = orthonormal_columns(G);
    r = rayleigh_step(A, G, true, which, H);
    best = which == Extreme::min ? std::min(best, r) : std::max(best, r);
  }
  return best;
}

}  // namespace

RestrictedConstants estimate_restricted_constants(const MeasurementOperator& A, std::size_t s,
                                                  std::size_t trials, std::size_t refine_iters,
                                                  std::uint64_t seed, unsigned threads) {
  if (s < 1 || s > A.n()) {
    throw ParameterError("s", "must lie in [1, " + std::to_string(A.n()) + "], got " +
                                  std::to_string(s));
  }
  if (trials < 1) throw ParameterError("trials", "must be at least 1");
  const auto n = static_cast<Eigen::Index>(A.n());
  const auto rank = static_cast<Eigen::Index>(s);

  std::vector<double> lows(trials), highs(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    GaussianStream rng(seed, "restricted-constants", i);
    const Mat G = rng.matrix(n, rank);
    const Mat H = rng.matrix(n, rank);
    const Mat Z = G * H.transpose();
    const double norm = Z.norm();
    const double ratio = norm > 0.0 ? apply(A, Z).norm() / norm : 0.0;
    lows[i] = refine(A, G, H, refine_iters, Extreme::min, ratio);
    highs[i] = refine(A, G, H, refine_iters, Extreme::max, ratio);
  });

  RestrictedConstants rc;
  rc.s = s;
  rc.trials = trials;
  rc.refine_iters = refine_iters;
  rc.seed = seed;
  rc.alpha_hat = *std::min_element(lows.begin(), lows.end());
  rc.beta_hat = *std::max_element(highs.begin(), highs.end());
  rc.alpha_hat = std::min(rc.alpha_hat, rc.beta_hat);
  if (rc.beta_hat <= 0.0 || rc.alpha_hat <= 1e-14 * rc.beta_hat) {
    rc.degenerate = true;
  } else {
    const double gamma = (rc.beta_hat * rc.beta_hat) / (rc.alpha_hat * rc.alpha_hat);
    rc.gamma_hat = gamma;
    rc.delta_hat = delta_from_gamma(gamma);
  }
  return rc;
}

nlohmann::json to_json(const RestrictedConstants& rc) {
  nlohmann::json j{{"s", rc.s},
                   {"alpha_hat", rc.alpha_hat},
                   {"beta_hat", rc.beta_hat},
                   {"degenerate", rc.degenerate},
                   {"trials", rc.trials},
                   {"refine_iters", rc.refine_iters},
                   {"seed", rc.seed},
                   {"sidedness", rc.sidedness}};
  j["gamma_hat"] = rc.gamma_hat ? nlohmann::json(*rc.gamma_hat) : nlohmann::json(nullptr);
  j["delta_hat"] = rc.delta_hat ? nlohmann::json(*rc.delta_hat) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lowrank
