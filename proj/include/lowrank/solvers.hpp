#pragma once

// Reconstruction maps: minimize ||Z||_{S_p} subject to A(Z) = y, or to
// ||A(Z) - y|| <= beta_2s * theta when theta > 0.

#include "lowrank/measurements.hpp"
#include "lowrank/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lowrank {

struct SolveOptions {
  std::size_t max_iters = 5000;
  double tol_residual = 1e-8;
  double tol_change = 1e-9;
  double penalty = 1.0;
  /// IRLS smoothing levels; empty means 0.5^k for k = 0.. floored at 1e-9.
  std::vector<double> epsilon_schedule;
  /// IRLS iterations spent at each smoothing level; a level is left early
  /// once the iterate stops changing.
  std::size_t epsilon_hold = 1;
  /// Finish IRLS with quasi-Newton steps on the smoothed objective along
  /// ker A (exact data only, kernel dimension up to 512).
  bool polish = true;
  std::optional<Mat> warm_start;
  bool record_trace = false;

  void validate() const;
  static std::vector<double> default_epsilon_schedule();
};

struct TraceRow {
  std::size_t iter = 0;
  double objective = 0.0;
  double residual = 0.0;
};

struct SolveResult {
  Mat minimizer;
  double objective = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string status_note;
  double p = 1.0;
  double budget = 0.0;  ///< beta_2s * theta
  std::vector<TraceRow> trace;
};

nlohmann::json to_json(const SolveResult& r, bool include_minimizer = true);
std::string trace_csv(const SolveResult& r);

/// Nuclear-norm minimization by ADMM: singular value soft-thresholding
/// alternated with Euclidean projection onto the feasible set.
SolveResult recover_nuclear(const MeasurementOperator& A, const Vec& y, double theta,
                            double beta_2s, const SolveOptions& opts = {});

/// Schatten-p minimization for 0 < p < 1 by iteratively reweighted least
/// squares on sum (sigma_i^2 + eps^2)^{p/2}. Returns a local minimizer.
SolveResult recover_schatten_p(const MeasurementOperator& A, const Vec& y, double p, double theta,
                               double beta_2s, const SolveOptions& opts = {});

/// Dispatches to recover_nuclear for p = 1 and recover_schatten_p below.
SolveResult recover(const MeasurementOperator& A, const Vec& y, double p, double theta,
                    double beta_2s, const SolveOptions& opts = {});

/// Brute-force global minimizer for tiny problems (N <= 3): grid over the
/// kernel coordinates of the affine feasible set, then compass-search polish.
Mat oracle_recover_small(const MeasurementOperator& A, const Vec& y, double p,
                         std::size_t grid_density = 41);

/// Affine feasible set {z : ||M z - y|| <= budget} of a measurement operator,
/// with exact Euclidean projection. Exposed for the geometry module.
class FeasibleSet {
 public:
  FeasibleSet(const MeasurementOperator& A, const Vec& y, double budget);

  Mat project(const Mat& W) const;
  double residual(const Mat& Z) const;
  /// Minimum-norm element (the least-squares solution when y is outside range(A)).
  const Mat& particular() const { return particular_; }
  /// Orthonormal basis of ker(A) as columns over row-major vec(X).
  Eigen::MatrixXd kernel_basis() const;
  Eigen::Index rank() const { return rank_; }
  /// Distance from y to range(A).
  double inconsistency() const { return off_range_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index rank_ = 0;
  double budget_ = 0.0;
  double off_range_ = 0.0;
  Eigen::MatrixXd M_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd v_;      // row-space basis (N^2 x rank)
  Eigen::VectorXd sv_;     // nonzero singular values
  Eigen::VectorXd uy_;     // U_r^T y
  Mat particular_;
};

}  // namespace lowrank
