#pragma once

// Null-space and width experiments: kernel bases, the width property
// constant, the null-space property margin, empirical Gelfand-width upper
// bounds via recovery, scaling-law fits, and the compressive-width bracket.

#include "lowrank/measurements.hpp"
#include "lowrank/solvers.hpp"
#include "lowrank/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lowrank {

struct KernelBasis {
  std::size_t n = 0;
  std::vector<Mat> basis;  ///< orthonormal under the trace inner product

  std::size_t dim() const { return basis.size(); }
  /// sum_j c_j B_j
  Mat combine(const Eigen::VectorXd& c) const;
  /// Coordinates <B_j, X> of the orthogonal projection of X onto the kernel.
  Eigen::VectorXd coordinates(const Mat& X) const;
};

KernelBasis kernel_basis(const MeasurementOperator& A);

// ---------------------------------------------------------------------------

/// Empirical constant of the width property
///   ||X||_{S_2} <= C (N/m)^{1/2} ||X||_{S_1},  X in ker(A),
/// i.e. sup (m/N)^{1/2} ||X||_{S_2} / ||X||_{S_1} over sampled kernel
/// elements. A lower estimate of the best constant.
struct MwpResult {
  double constant = 0.0;
  Mat witness;  ///< kernel element attaining `constant` (empty for a trivial kernel)
  std::size_t trials = 0;
  std::string note;
};

MwpResult mwp_constant(const MeasurementOperator& A, std::size_t trials, std::size_t refine_iters,
                       std::uint64_t seed);

/// ||V - V_[2s]||_{S_p}^p - ||V_[2s]||_{S_p}^p (unnormalized).
double nsp_margin(const Mat& V, std::size_t s, double p);

struct NspResult {
  double pass_fraction = 0.0;  ///< over the raw random kernel samples
  double worst_margin = 0.0;   ///< normalized by ||V||_{S_p}^p, after refinement
  bool adversarial_pass = false;
  std::size_t trials = 0;
  Mat worst;
};

NspResult nsp_check(const MeasurementOperator& A, std::size_t s, double p, std::size_t trials,
                    std::uint64_t seed, std::size_t refine_steps = 50);

// ---------------------------------------------------------------------------

struct WidthOptions {
  /// Constant C in m >= C s N; below m < C N the zero map is used.
  double c_delta = 6.0;
  SolveOptions solver;
  std::size_t rip_trials = 4;
  std::size_t rip_refine_iters = 4;
  /// Extra samples drawn from ker A (where the recovery map returns 0),
  /// each pushed toward the largest q/p norm ratio.
  std::size_t kernel_samples = 8;
  std::size_t kernel_refine_steps = 50;
  unsigned threads = 1;
};

struct WidthEstimate {
  std::size_t N = 0;
  std::size_t m = 0;
  double p = 1.0;
  double q = 2.0;
  double r = 1.0;
  std::size_t s = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  double kernel_estimate = 0.0;  ///< best kernel-direction sample alone
  double theory = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  bool zero_map = false;
  std::optional<double> delta_hat_2s;
  std::size_t chain_checked = 0;     ///< samples where the delta <= 1/3 chain was tested
  std::size_t chain_violations = 0;
  std::size_t solver_failures = 0;
};

/// Singular value profiles used to probe the unit ball: flat rank-j profiles
/// normalized to the ball, plus k^{-1/p} decay for the weak ball (p < 1).
std::vector<Vec> extremal_profiles(std::size_t N, double p);

WidthEstimate width_upper_bound(std::size_t N, std::size_t m, double p, double q,
                                std::size_t trials, std::uint64_t seed,
                                const WidthOptions& opts = {});

struct GridPoint {
  std::size_t N = 0;
  std::size_t m = 0;
  double p = 1.0;
  double q = 2.0;
};

struct WidthFit {
  std::size_t N = 0;
  double p = 1.0;
  double q = 2.0;
  std::optional<double> exponent;  ///< least-squares slope of log estimate vs log m
  double theory_exponent = 0.0;
  std::size_t rows_used = 0;
  std::string note;
};

struct WidthTable {
  std::vector<WidthEstimate> rows;
  std::vector<WidthFit> fits;
};

/// Estimates below this are treated as exact recovery and left out of fits.
inline constexpr double kFitFloor = 1e-6;

WidthTable width_scaling_experiment(const std::vector<GridPoint>& grid, std::size_t trials,
                                    std::uint64_t seed, const WidthOptions& opts = {});

std::string width_csv(const WidthTable& table);
nlohmann::json width_metadata(const WidthTable& table, const WidthOptions& opts);

/// (d_m, 2^{1/p} d_m)
std::pair<double, double> compressive_width_bracket(double d_m, double p);

// ---------------------------------------------------------------------------

struct CsPropertyRow {
  double rho_s_1 = 0.0;
  double norm_1 = 0.0;
  double err_2 = 0.0;
  double strong = 0.0;  ///< err * s^{1/2} / rho_s(X)_{S_1}
  double weak = 0.0;    ///< err * s^{1/2} / ||X||_{S_1}
  bool kernel_sample = false;
  bool solver_failed = false;
};

struct CsPropertyReport {
  std::size_t s = 0;
  double s_n_over_m = 0.0;
  double c_strong = 0.0;
  double c_weak = 0.0;
  double c_mwp = 0.0;
  double c_mwp_rescaled = 0.0;  ///< c_mwp * (s N / m)^{1/2}, comparable with c_weak
  double c_weak_kernel = 0.0;
  bool weak_le_strong = true;
  bool mwp_le_weak = true;
  std::size_t solver_failures = 0;
  std::vector<CsPropertyRow> rows;
};

CsPropertyReport mscsp_mwcsp_check(const MeasurementOperator& A, std::size_t s,
                                   std::size_t trials, std::uint64_t seed,
                                   const SolveOptions& solver = {});

nlohmann::json to_json(const NspResult& r);
nlohmann::json to_json(const CsPropertyReport& r);

}  // namespace lowrank
