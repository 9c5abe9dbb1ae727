#pragma once

// Linear measurement maps A : M_N -> R^m and empirical probing of their
// restricted extremal constants on low-rank matrices.

#include "lowrank/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lowrank {

inline constexpr double kDefaultMemoryGuardMb = 512.0;

enum class OperatorKind { gaussian_dense, entry_mask };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& s);

/// Immutable after construction; safe to share across threads.
class MeasurementOperator {
 public:
  using Index = std::pair<std::size_t, std::size_t>;

  /// Dense operator with explicit rows (row i is vec(A_i), row-major).
  static MeasurementOperator dense(std::size_t n, std::vector<double> rows, std::uint64_t seed = 0,
                                   double memory_guard_mb = kDefaultMemoryGuardMb);
  static MeasurementOperator mask(std::size_t n, std::vector<Index> indices, double scale);

  OperatorKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double scale() const noexcept { return scale_; }
  std::span<const double> payload() const noexcept { return payload_; }
  const std::vector<Index>& indices() const noexcept { return indices_; }

  /// Row i of the dense payload as an N x N matrix.
  Mat sensing_matrix(std::size_t i) const;

  /// The operator as an m x N^2 matrix acting on row-major vec(X).
  Eigen::MatrixXd dense_matrix() const;

  bool operator==(const MeasurementOperator&) const = default;

 private:
  MeasurementOperator() = default;

  OperatorKind kind_ = OperatorKind::gaussian_dense;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::uint64_t seed_ = 0;
  double scale_ = 1.0;
  std::vector<double> payload_;
  std::vector<Index> indices_;
};

/// Entries i.i.d. N(0, 1/m), reproducible from `seed`.
MeasurementOperator gaussian_operator(std::size_t n, std::size_t m, std::uint64_t seed,
                                      double memory_guard_mb = kDefaultMemoryGuardMb);

/// A(X)_k = scale * X(i_k, j_k).
MeasurementOperator entry_mask_operator(std::size_t n, std::vector<MeasurementOperator::Index> indices,
                                        double scale = 1.0);

/// Mask of all N^2 entries in row-major order: A(X) = scale * vec(X).
MeasurementOperator full_vectorization(std::size_t n, double scale = 1.0);

/// m distinct entries drawn uniformly from `seed`.
MeasurementOperator random_mask_operator(std::size_t n, std::size_t m, std::uint64_t seed,
                                         double scale = 1.0);

Vec apply(const MeasurementOperator& A, const Mat& X);
Mat adjoint(const MeasurementOperator& A, const Vec& y);

nlohmann::json operator_header(const MeasurementOperator& A);

/// Restores an operator from its JSON header. Gaussian operators without an
/// explicit payload are regenerated from their seed; `payload` overrides it.
MeasurementOperator operator_from_header(const nlohmann::json& header,
                                         const std::optional<Eigen::MatrixXd>& payload = std::nullopt,
                                         double memory_guard_mb = kDefaultMemoryGuardMb);

// ---------------------------------------------------------------------------
// Restricted constants

/// Empirical bracket of the best constants in
///   alpha_s ||Z||_{S_2} <= ||A Z|| <= beta_s ||Z||_{S_2},  rank(Z) <= s.
/// alpha_hat is an upper estimate of alpha_s and beta_hat a lower estimate
/// of beta_s, so gamma_hat never exceeds the true gamma.
struct RestrictedConstants {
  std::size_t s = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::optional<double> gamma_hat;
  std::optional<double> delta_hat;
  bool degenerate = false;
  std::size_t trials = 0;
  std::size_t refine_iters = 0;
  std::uint64_t seed = 0;
  std::string sidedness =
      "alpha_hat is an upper estimate of alpha_s; beta_hat is a lower estimate of beta_s";
};

RestrictedConstants estimate_restricted_constants(const MeasurementOperator& A, std::size_t s,
                                                  std::size_t trials, std::size_t refine_iters,
                                                  std::uint64_t seed, unsigned threads = 1);

nlohmann::json to_json(const RestrictedConstants& rc);

/// gamma = (1 + delta) / (1 - delta) for delta in [0, 1).
double gamma_from_delta(double delta);
/// delta = (gamma - 1) / (gamma + 1) for gamma >= 1.
double delta_from_gamma(double gamma);

}  // namespace lowrank
