#include "lowrank/solvers.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/schatten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lowrank {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vec(const Mat& X) { return {X.data(), X.size()}; }

Mat as_mat(const Eigen::VectorXd& v, Eigen::Index n) {
  return Eigen::Map<const Mat>(v.data(), n, n);
}

Mat soft_threshold_singular_values(const Mat& W, double tau) {
  Eigen::JacobiSVD<Mat> dec(W, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec sigma = (dec.singularValues().array() - tau).max(0.0);
  const Eigen::Index keep = (sigma.array() > 0.0).count();
  if (keep == 0) return Mat::Zero(W.rows(), W.cols());
  return dec.matrixU().leftCols(keep) * sigma.head(keep).asDiagonal() *
         dec.matrixV().leftCols(keep).transpose();
}

void check_problem(const MeasurementOperator& A, const Vec& y, double theta, double beta_2s) {
  if (static_cast<std::size_t>(y.size()) != A.m()) {
    throw InputError("y has length " + std::to_string(y.size()) + ", operator has m = " +
                     std::to_string(A.m()));
  }
  require_finite(y, "y");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ParameterError("theta", "must be >= 0");
  if (theta > 0.0 && !(beta_2s > 0.0 && std::isfinite(beta_2s))) {
    throw ParameterError("beta_2s", "must be positive when theta > 0");
  }
}

SolveResult zero_result(const MeasurementOperator& A, const Vec& y, double p, double budget,
                        std::string note) {
  const auto n = static_cast<Eigen::Index>(A.n());
  SolveResult r;
  r.minimizer = Mat::Zero(n, n);
  r.objective = 0.0;
  r.residual = y.norm();
  r.iterations = 0;
  r.converged = true;
  r.status_note = std::move(note);
  r.p = p;
  r.budget = budget;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> SolveOptions::default_epsilon_schedule() {
  std::vector<double> eps;
  for (double e = 1.0; e > 1e-9; e *= 0.5) eps.push_back(e);
  eps.push_back(1e-9);
  return eps;
}

void SolveOptions::validate() const {
  if (max_iters < 1) throw ParameterError("max_iters", "must be at least 1");
  if (!(tol_residual > 0.0)) throw ParameterError("tol_residual", "must be positive");
  if (!(tol_change > 0.0)) throw ParameterError("tol_change", "must be positive");
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw ParameterError("penalty", "must be positive");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    const double e = epsilon_schedule[i];
    if (!(e >= 1e-10) || !std::isfinite(e)) {
      throw ParameterError("epsilon_schedule", "entries must be finite and >= 1e-10");
    }
    if (i > 0 && !(e < epsilon_schedule[i - 1])) {
      throw ParameterError("epsilon_schedule", "must be strictly decreasing");
    }
  }
  if (epsilon_hold < 1) throw ParameterError("epsilon_hold", "must be at least 1");
  if (warm_start && !warm_start->allFinite()) throw InputError("warm_start has non-finite entries");
}

nlohmann::json to_json(const SolveResult& r, bool include_minimizer) {
  nlohmann::json j{{"objective", r.objective},   {"residual", r.residual},
                   {"iterations", r.iterations}, {"converged", r.converged},
                   {"status_note", r.status_note}, {"p", r.p},
                   {"budget", r.budget}};
  if (include_minimizer) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.minimizer.size(); ++i) data.push_back(r.minimizer.data()[i]);
    j["minimizer"] = {{"rows", r.minimizer.rows()}, {"cols", r.minimizer.cols()}, {"data", data}};
  }
  return j;
}

std::string trace_csv(const SolveResult& r) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,objective,residual\n";
  for (const auto& row : r.trace) out << row.iter << ',' << row.objective << ',' << row.residual << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

FeasibleSet::FeasibleSet(const MeasurementOperator& A, const Vec& y, double budget)
    : n_(static_cast<Eigen::Index>(A.n())), budget_(budget), M_(A.dense_matrix()), y_(y) {
  if (static_cast<std::size_t>(y.size()) != A.m()) throw InputError("y length does not match operator");
  Eigen::BDCSVD<Eigen::MatrixXd> dec(M_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = dec.singularValues();
  const double top = sv.size() > 0 ? sv[0] : 0.0;
  rank_ = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-11 * top && top > 0.0) ++rank_;
  }
  v_ = dec.matrixV().leftCols(rank_);
  sv_ = sv.head(rank_);
  const Eigen::MatrixXd u = dec.matrixU().leftCols(rank_);
  uy_ = u.transpose() * y;
  off_range_ = (y - u * uy_).norm();
  const Eigen::VectorXd x0 = v_ * uy_.cwiseQuotient(sv_);
  particular_ = as_mat(x0, n_);
}

double FeasibleSet::residual(const Mat& Z) const { return (M_ * as_vec(Z) - y_).norm(); }

Mat FeasibleSet::project(const Mat& W) const {
  const Eigen::VectorXd w = as_vec(W);
  const Eigen::VectorXd a = v_.transpose() * w;
  const Eigen::VectorXd exact = uy_.cwiseQuotient(sv_);
  const double slack2 = budget_ * budget_ - off_range_ * off_range_;
  if (budget_ <= 0.0 || slack2 <= 0.0) return as_mat(w + v_ * (exact - a), n_);

  const double slack = std::sqrt(slack2);
  auto misfit = [&](double lambda) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv_.size(); ++i) {
      const double e = (sv_[i] * a[i] - uy_[i]) / (1.0 + lambda * sv_[i] * sv_[i]);
      acc += e * e;
    }
    return std::sqrt(acc);
  };
  if (misfit(0.0) <= slack) return W;

  double lo = 0.0, hi = 1.0;
  while (misfit(hi) > slack && hi < 1e300) hi *= 4.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = lo == 0.0 ? hi / 2.0 : std::sqrt(lo * hi);
    (misfit(mid) > slack ? lo : hi) = mid;
  }
  const double lambda = hi;
  Eigen::VectorXd c(sv_.size());
  for (Eigen::Index i = 0; i < sv_.size(); ++i) {
    c[i] = (a[i] + lambda * sv_[i] * uy_[i]) / (1.0 + lambda * sv_[i] * sv_[i]);
  }
  return as_mat(w + v_ * (c - a), n_);
}

Eigen::MatrixXd FeasibleSet::kernel_basis() const {
  const Eigen::Index dim = n_ * n_;
  if (rank_ == 0) return Eigen::MatrixXd::Identity(dim, dim);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M_.transpose());
  qr.setThreshold(1e-11);
  const Eigen::Index r = qr.rank();
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(dim - r);
}

// ---------------------------------------------------------------------------

SolveResult recover_nuclear(const MeasurementOperator& A, const Vec& y, double theta,
                            double beta_2s, const SolveOptions& opts) {
  opts.validate();
  check_problem(A, y, theta, beta_2s);
  const double budget = theta > 0.0 ? beta_2s * theta : 0.0;
  const double scale = y.norm();
  if (scale == 0.0) return zero_result(A, y, 1.0, budget, "zero measurements");
  if (scale <= budget) return zero_result(A, y, 1.0, budget, "zero matrix is feasible");

  const auto n = static_cast<Eigen::Index>(A.n());
  const Vec yn = y / scale;
  const FeasibleSet set(A, yn, budget / scale);
  if (budget == 0.0 && set.inconsistency() > opts.tol_residual) {
    throw InputError("y is not in the range of the operator (distance " +
                     std::to_string(set.inconsistency() * scale) + ")");
  }

  Mat Z = opts.warm_start ? set.project(*opts.warm_start / scale) : set.particular();
  if (opts.warm_start && (opts.warm_start->rows() != n || opts.warm_start->cols() != n)) {
    throw InputError("warm_start has the wrong shape");
  }
  Mat U = Mat::Zero(n, n);
  double rho = opts.penalty;

  SolveResult res;
  res.p = 1.0;
  res.budget = budget;
  double r_primal = std::numeric_limits<double>::infinity();
  double r_dual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opts.max_iters; ++it) {
    const Mat X = soft_threshold_singular_values(Z - U, 1.0 / rho);
    const Mat Znew = set.project(X + U);
    U += X - Znew;
    r_primal = (X - Znew).norm();
    r_dual = rho * (Znew - Z).norm();
    Z = Znew;
    if (opts.record_trace) {
      res.trace.push_back({it + 1, schatten_norm(Z, 1.0) * scale,
                           (apply(A, Z) * scale - y).norm()});
    }
    if (r_primal <= opts.tol_change && r_dual <= opts.tol_change) {
      ++it;
      res.converged = true;
      break;
    }
    // Residual balancing during the first phase only.
    if (it < 2000 && it % 10 == 9) {
      if (r_primal > 10.0 * r_dual) {
        rho *= 2.0;
        U /= 2.0;
      } else if (r_dual > 10.0 * r_primal) {
        rho /= 2.0;
        U *= 2.0;
      }
    }
  }

  res.minimizer = Z * scale;
  res.objective = schatten_norm(res.minimizer, 1.0);
  res.residual = (apply(A, res.minimizer) - y).norm();
  res.iterations = it;
  std::ostringstream note;
  note.precision(3);
  note << "admm primal=" << r_primal << " dual=" << r_dual;
  if (!res.converged) note << " (max_iters reached)";
  res.status_note = note.str();
  return res;
}

// ---------------------------------------------------------------------------

namespace {

// Minimizes tr(Z^T W Z) over the feasible set, where Winv = W^{-1} acts on
// the left. Returns the new iterate in normalized units.
Mat weighted_least_squares(const std::vector<Mat>& sensing, const Mat& Winv, const Vec& y,
                           double budget) {
  const auto m = static_cast<Eigen::Index>(sensing.size());
  const Eigen::Index n = Winv.rows();
  std::vector<Mat> B(sensing.size());
  for (Eigen::Index i = 0; i < m; ++i) B[i] = Winv * sensing[i];
  Eigen::MatrixXd G(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      G(i, j) = G(j, i) = trace_inner(sensing[i], B[j]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  const Eigen::VectorXd qy = Q.transpose() * y;
  const double cutoff = 1e-15 * std::max(lam.maxCoeff(), 0.0);

  Eigen::VectorXd coef(m);
  auto solve_with = [&](double shift) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = lam[i] + shift;
      coef[i] = (lam[i] > cutoff || shift > 0.0) ? qy[i] / d : 0.0;
    }
  };
  if (budget <= 0.0) {
    solve_with(0.0);
  } else {
    // residual(shift) = shift * ||(G + shift)^{-1} y|| grows from 0 to ||y||.
    auto misfit = [&](double shift) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double e = shift * qy[i] / (std::max(lam[i], 0.0) + shift);
        acc += e * e;
      }
      return std::sqrt(acc);
    };
    double lo = 0.0, hi = std::max(lam.maxCoeff(), 1e-300);
    while (misfit(hi) < budget && hi < 1e300) hi *= 4.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = lo == 0.0 ? hi / 2.0 : std::sqrt(lo * hi);
      (misfit(mid) < budget ? lo : hi) = mid;
    }
    solve_with(lo);
  }
  const Eigen::VectorXd c = Q * coef;
  Mat Z = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < m; ++i) Z += c[i] * B[i];
  return Z;
}

constexpr Eigen::Index kMaxPolishKernel = 512;

Mat inverse_weight(const Mat& Z, double eps, double p) {
  const Mat S = Z * Z.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig(S);
  Vec d = eig.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d[i] = std::pow(std::max(d[i], 0.0) + eps * eps, 1.0 - p / 2.0);
  }
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

// BFGS with an Armijo line search on sum_i (sigma_i^2 + eps^2)^{p/2} over
// base + K c, for eps decreasing by decades. The smoothing lets the search
// slide along the low-rank set where the exact objective has a kink.
Eigen::VectorXd smoothed_descent(const Eigen::VectorXd& base, const Eigen::MatrixXd& K,
                                 Eigen::Index n, double p, Eigen::VectorXd c, double eps_first,
                                 double eps_last) {
  const Eigen::Index d = K.cols();
  auto eval = [&](const Eigen::VectorXd& x, double eps, Eigen::VectorXd& grad) {
    const Mat Z = as_mat(base + K * x, n);
    Eigen::JacobiSVD<Mat> dec(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& sig = dec.singularValues();
    Vec w(sig.size());
    double f = 0.0;
    for (Eigen::Index i = 0; i < sig.size(); ++i) {
      const double t = sig[i] * sig[i] + eps * eps;
      f += std::pow(t, 0.5 * p);
      w[i] = p * sig[i] * std::pow(t, 0.5 * p - 1.0);
    }
    const Mat G = dec.matrixU() * w.asDiagonal() * dec.matrixV().transpose();
    grad = K.transpose() * as_vec(G);
    return f;
  };

  for (double eps = eps_first; eps >= eps_last; eps *= 0.1) {
    Eigen::VectorXd g(d), g_new(d);
    double f = eval(c, eps, g);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
    bool scaled = false;
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd dir = -H * g;
      double slope = g.dot(dir);
      if (!(slope < 0.0)) {
        H.setIdentity();
        dir = -g;
        slope = -g.squaredNorm();
      }
      if (slope == 0.0) break;
      double t = 1.0, f_new = f;
      Eigen::VectorXd trial = c;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        trial = c + t * dir;
        f_new = eval(trial, eps, g_new);
        if (f_new <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      const Eigen::VectorXd step = trial - c;
      const Eigen::VectorXd dy = g_new - g;
      c = trial;
      const double f_old = f;
      f = f_new;
      g = g_new;
      const double sy = step.dot(dy);
      if (sy > 1e-300) {
        if (!scaled) {
          H *= sy / dy.squaredNorm();
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const Eigen::MatrixXd E = Eigen::MatrixXd::Identity(d, d) - rho * step * dy.transpose();
        H = E * H * E.transpose() + rho * step * step.transpose();
      }
      if (f_old - f <= 1e-15 * std::abs(f) && step.norm() <= 1e-14 * (1.0 + c.norm())) break;
    }
  }
  return c;
}

}  // namespace

SolveResult recover_schatten_p(const MeasurementOperator& A, const Vec& y, double p, double theta,
                               double beta_2s, const SolveOptions& opts) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("p", "must lie in (0, 1), got " + std::to_string(p));
  opts.validate();
  check_problem(A, y, theta, beta_2s);
  const double budget = theta > 0.0 ? beta_2s * theta : 0.0;
  const double scale = y.norm();
  if (scale == 0.0) return zero_result(A, y, p, budget, "zero measurements");
  if (scale <= budget) return zero_result(A, y, p, budget, "zero matrix is feasible");

  const auto n = static_cast<Eigen::Index>(A.n());
  const Vec yn = y / scale;
  const double nb = budget / scale;

  Mat warm;
  if (opts.warm_start) {
    if (opts.warm_start->rows() != n || opts.warm_start->cols() != n) {
      throw InputError("warm_start has the wrong shape");
    }
    warm = FeasibleSet(A, yn, nb).project(*opts.warm_start / scale);
  } else {
    SolveOptions inner = opts;
    inner.record_trace = false;
    warm = recover_nuclear(A, yn, theta, beta_2s / scale, inner).minimizer;
  }

  std::vector<Mat> sensing;
  sensing.reserve(A.m());
  for (std::size_t i = 0; i < A.m(); ++i) sensing.push_back(A.sensing_matrix(i));

  const std::vector<double> schedule =
      opts.epsilon_schedule.empty() ? SolveOptions::default_epsilon_schedule() : opts.epsilon_schedule;
  const double feasible_tol = nb + opts.tol_residual;
  auto misfit = [&](const Mat& Z) { return (apply(A, Z) - yn).norm(); };

  Mat best = warm;
  double best_obj = schatten_power(warm, p);
  Mat Z = warm;

  SolveResult res;
  res.p = p;
  res.budget = budget;
  double change = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  std::size_t level = 0, at_level = 0;
  for (; it < opts.max_iters; ++it) {
    const Mat Znew = weighted_least_squares(sensing, inverse_weight(Z, schedule[level], p), yn, nb);
    change = (Znew - Z).norm();
    Z = Znew;
    const double obj = schatten_power(Z, p);
    const double r = misfit(Z);
    if (opts.record_trace) res.trace.push_back({it + 1, std::pow(obj, 1.0 / p) * scale, r * scale});
    if (r <= feasible_tol && obj < best_obj) {
      best = Z;
      best_obj = obj;
    }
    if (level == schedule.size() - 1 && change <= opts.tol_change) {
      ++it;
      res.converged = true;
      break;
    }
    if (level + 1 < schedule.size() && (++at_level >= opts.epsilon_hold || change <= opts.tol_change)) {
      ++level;
      at_level = 0;
    }
  }

  // IRLS creeps once a singular value reaches the smoothing floor; finish
  // with quasi-Newton steps along ker A at small smoothing levels.
  const Eigen::Index kernel_dim = n * n - static_cast<Eigen::Index>(A.m());
  if (opts.polish && nb == 0.0 && kernel_dim > 0 && kernel_dim <= kMaxPolishKernel) {
    const FeasibleSet set(A, yn, 0.0);
    const Eigen::MatrixXd K = set.kernel_basis();
    if (K.cols() > 0) {
      const double top = singular_values(best).maxCoeff();
      const Eigen::VectorXd base = as_vec(best);
      const Eigen::VectorXd c = smoothed_descent(base, K, n, p, Eigen::VectorXd::Zero(K.cols()),
                                                 1e-4 * top, 1e-10 * top);
      const Mat polished = as_mat(base + K * c, n);
      const double obj = schatten_power(polished, p);
      if (obj < best_obj && misfit(polished) <= feasible_tol) {
        best = polished;
        best_obj = obj;
      }
    }
  }

  res.minimizer = best * scale;
  res.objective = schatten_norm(res.minimizer, p);
  res.residual = (apply(A, res.minimizer) - y).norm();
  res.iterations = it;
  std::ostringstream note;
  note.precision(3);
  note << "local minimizer (irls) last_change=" << change;
  if (!res.converged) note << " (max_iters reached)";
  res.status_note = note.str();
  return res;
}

SolveResult recover(const MeasurementOperator& A, const Vec& y, double p, double theta,
                    double beta_2s, const SolveOptions& opts) {
  if (p == 1.0) return recover_nuclear(A, y, theta, beta_2s, opts);
  return recover_schatten_p(A, y, p, theta, beta_2s, opts);
}

// ---------------------------------------------------------------------------

Mat oracle_recover_small(const MeasurementOperator& A, const Vec& y, double p,
                         std::size_t grid_density) {
  if (A.n() > 3) throw ParameterError("n", "oracle_recover_small supports N <= 3 only");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  if (grid_density < 3) throw ParameterError("grid_density", "must be at least 3");
  check_problem(A, y, 0.0, 0.0);
  const auto n = static_cast<Eigen::Index>(A.n());
  const FeasibleSet set(A, y, 0.0);
  if (set.inconsistency() > 1e-9 * std::max(1.0, y.norm())) {
    throw InputError("infeasible: y is not in the range of the operator");
  }
  const Mat& x0 = set.particular();
  const Eigen::MatrixXd K = set.kernel_basis();
  const Eigen::Index d = K.cols();
  if (d == 0) return x0;

  const Eigen::VectorXd base = as_vec(x0);
  auto objective = [&](const Eigen::VectorXd& c) {
    const Eigen::VectorXd z = base + K * c;
    return schatten_power(as_mat(z, n), p);
  };

  // Any minimizer has ||c|| <= ||x0||_{S_p} since x0 is orthogonal to ker(A).
  const double radius = std::max(schatten_norm(x0, p), 1e-12);
  std::size_t g = grid_density;
  const double cap = 2e6;
  while (g > 3 && std::pow(static_cast<double>(g), static_cast<double>(d)) > cap) --g;
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= g;

  constexpr std::size_t kStarts = 6;
  std::vector<std::pair<double, Eigen::VectorXd>> starts;
  Eigen::VectorXd c(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (Eigen::Index k = 0; k < d; ++k) {
      c[k] = -radius + 2.0 * radius * static_cast<double>(rem % g) / static_cast<double>(g - 1);
      rem /= g;
    }
    if (c.norm() > radius * (1.0 + 1e-12) + 2.0 * radius / static_cast<double>(g - 1)) continue;
    const double f = objective(c);
    if (starts.size() < kStarts || f < starts.back().first) {
      starts.emplace_back(f, c);
      std::sort(starts.begin(), starts.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (starts.size() > kStarts) starts.pop_back();
    }
  }

  // Pattern search over coordinate directions plus a few fixed random ones,
  // so kinks not aligned with the axes do not stall the polish.
  GaussianStream rng(0x5eed, "oracle-directions");
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index k = 0; k < d; ++k) dirs.push_back(Eigen::VectorXd::Unit(d, k));
  for (Eigen::Index k = 0; k < 4 * d; ++k) dirs.push_back(rng.vector(d).normalized());

  // Smooth each start toward its local minimizer first.
  const double scale = std::max(radius / static_cast<double>(n), 1e-300);
  for (auto& [f0, c0] : starts) {
    const Eigen::VectorXd c1 = smoothed_descent(base, K, n, p, c0, 0.1 * scale, 1e-10 * scale);
    const double f1 = objective(c1);
    if (f1 < f0) {
      f0 = f1;
      c0 = c1;
    }
  }
  std::sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  Eigen::VectorXd best_c = starts.front().second;
  double best_f = starts.front().first;
  for (auto& [f0, c0] : starts) {
    Eigen::VectorXd cur = c0;
    double fcur = f0;
    const double h0 = 2.0 * radius / static_cast<double>(g - 1);
    double h = h0;
    // Grow the step after a successful pass so long valleys are crossed in
    // few moves; shrink it after a failed one.
    for (std::size_t pass = 0; pass < 20000 && h > 1e-13 * radius; ++pass) {
      bool moved = false;
      for (const auto& dir : dirs) {
        for (double sign : {1.0, -1.0}) {
          const Eigen::VectorXd trial = cur + sign * h * dir;
          const double ft = objective(trial);
          if (ft < fcur) {
            cur = trial;
            fcur = ft;
            moved = true;
          }
        }
      }
      h = moved ? std::min(2.0 * h, h0) : 0.5 * h;
    }
    if (fcur < best_f) {
      best_f = fcur;
      best_c = cur;
    }
  }

  // Zooming grid around the incumbent: every pass scans a 9^d box and then
  // halves it, which is insensitive to kinks along any direction.
  constexpr std::size_t kZoom = 9;
  if (d <= 4) {
    std::size_t box = 1;
    for (Eigen::Index i = 0; i < d; ++i) box *= kZoom;
    double half = 4.0 * radius / static_cast<double>(g - 1);
    while (half > 1e-13 * radius) {
      const Eigen::VectorXd center = best_c;
      for (std::size_t idx = 0; idx < box; ++idx) {
        std::size_t rem = idx;
        for (Eigen::Index k = 0; k < d; ++k) {
          c[k] = center[k] - half + 2.0 * half * static_cast<double>(rem % kZoom) / (kZoom - 1);
          rem /= kZoom;
        }
        const double f = objective(c);
        if (f < best_f) {
          best_f = f;
          best_c = c;
        }
      }
      half *= 0.5;
    }
  }
  return as_mat(base + K * best_c, n);
}

}  // namespace lowrank
