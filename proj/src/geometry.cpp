#include "lowrank/geometry.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/schatten.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace lowrank {

Mat KernelBasis::combine(const Eigen::VectorXd& c) const {
  const auto nn = static_cast<Eigen::Index>(n);
  Mat X = Mat::Zero(nn, nn);
  for (std::size_t j = 0; j < basis.size(); ++j) X += c[static_cast<Eigen::Index>(j)] * basis[j];
  return X;
}

Eigen::VectorXd KernelBasis::coordinates(const Mat& X) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) c[static_cast<Eigen::Index>(j)] = trace_inner(basis[j], X);
  return c;
}

KernelBasis kernel_basis(const MeasurementOperator& A) {
  const std::size_t n = A.n();
  const double mb = std::pow(static_cast<double>(n * n), 2.0) * 8.0 / (1024.0 * 1024.0);
  if (mb > kDefaultMemoryGuardMb) {
    throw ParameterError("memory_guard_mb", "kernel basis needs " + std::to_string(mb) + " MB");
  }
  const auto dim = static_cast<Eigen::Index>(n * n);
  const Eigen::MatrixXd M = A.dense_matrix();
  Eigen::MatrixXd Q;
  Eigen::Index rank = 0;
  if (M.cwiseAbs().maxCoeff() == 0.0) {
    Q = Eigen::MatrixXd::Identity(dim, dim);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
    qr.setThreshold(1e-11);
    rank = qr.rank();
    Q = qr.householderQ();
  }
  KernelBasis out;
  out.n = n;
  for (Eigen::Index j = rank; j < dim; ++j) {
    out.basis.emplace_back(Eigen::Map<const Mat>(Q.col(j).data(), static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n)));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Gradient-based local search over kernel coordinates for a scale-invariant
// objective; only improving steps are taken.
template <class Objective, class Gradient>
Eigen::VectorXd local_search(const KernelBasis& K, Eigen::VectorXd c, std::size_t steps,
                             bool maximize, Objective&& f, Gradient&& grad) {
  c.normalize();
  double fc = f(K.combine(c));
  double eta = 0.5;
  for (std::size_t it = 0; it < steps; ++it) {
    const Mat G = grad(K.combine(c));
    Eigen::VectorXd g = K.coordinates(G);
    g -= g.dot(c) * c;  // tangent to the unit sphere
    if (g.norm() < 1e-14) break;
    g.normalize();
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::VectorXd trial = maximize ? Eigen::VectorXd(c + eta * g) : Eigen::VectorXd(c - eta * g);
      trial.normalize();
      const double ft = f(K.combine(trial));
      if (maximize ? ft > fc : ft < fc) {
        c = trial;
        fc = ft;
        improved = true;
        eta = std::min(eta * 1.5, 1.0);
      } else {
        eta *= 0.5;
      }
    }
    if (!improved) break;
  }
  return c;
}

double nuclear_ratio(const Mat& X) {
  const double n1 = schatten_norm(X, 1.0);
  return n1 > 0.0 ? X.norm() / n1 : 0.0;
}

Mat nuclear_ratio_gradient(const Mat& X) {
  const SvdFactors f = svd(X);
  const double n1 = f.sigma.sum();
  const double n2 = X.norm();
  if (n1 <= 0.0) return Mat::Zero(X.rows(), X.cols());
  const Eigen::Index r = numerical_rank(f.sigma);
  const Mat polar = f.u.leftCols(r) * f.v.leftCols(r).transpose();
  return X / (n2 * n1) - n2 * polar / (n1 * n1);
}

double normalized_nsp_margin(const Mat& V, std::size_t s, double p) {
  const Vec sigma = singular_values(V);
  const auto cut = std::min<Eigen::Index>(static_cast<Eigen::Index>(2 * s), sigma.size());
  double head = 0.0, tail = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double v = sigma[i] > 0.0 ? std::pow(sigma[i], p) : 0.0;
    (i < cut ? head : tail) += v;
  }
  return head + tail > 0.0 ? (tail - head) / (head + tail) : 0.0;
}

Mat nsp_gradient(const Mat& V, std::size_t s, double p) {
  const SvdFactors f = svd(V);
  const Eigen::Index n = V.rows();
  const auto cut = std::min<Eigen::Index>(static_cast<Eigen::Index>(2 * s), n);
  const double floor = 1e-10 * std::max(f.sigma[0], 1e-300);
  double head = 0.0, tail = 0.0;
  Mat dhead = Mat::Zero(n, n), dtail = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = std::max(f.sigma[i], floor);
    const double val = std::pow(f.sigma[i], p);
    const Mat d = p * std::pow(sv, p - 1.0) * f.u.col(i) * f.v.col(i).transpose();
    if (i < cut) {
      head += val;
      dhead += d;
    } else {
      tail += val;
      dtail += d;
    }
  }
  const double total = head + tail;
  if (total <= 0.0) return Mat::Zero(n, n);
  return (dtail - dhead) / total - (tail - head) * (dtail + dhead) / (total * total);
}

}  // namespace

MwpResult mwp_constant(const MeasurementOperator& A, std::size_t trials, std::size_t refine_iters,
                       std::uint64_t seed) {
  if (trials < 1) throw ParameterError("trials", "must be at least 1");
  MwpResult res;
  res.trials = trials;
  const KernelBasis K = kernel_basis(A);
  if (K.dim() == 0) {
    res.note = "trivial kernel";
    return res;
  }
  const double factor = std::sqrt(static_cast<double>(A.m()) / static_cast<double>(A.n()));
  for (std::size_t i = 0; i < trials; ++i) {
    GaussianStream rng(seed, "mwp-sample", i);
    Eigen::VectorXd c = rng.vector(static_cast<Eigen::Index>(K.dim()));
    c = local_search(K, c, refine_iters, true, nuclear_ratio, nuclear_ratio_gradient);
    const Mat X = K.combine(c);
    const double value = factor * nuclear_ratio(X);
    if (value > res.constant) {
      res.constant = value;
      res.witness = X;
    }
  }
  res.note = "lower estimate of the best constant";
  return res;
}

double nsp_margin(const Mat& V, std::size_t s, double p) {
  require_square_finite(V, "V");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  const Vec sigma = singular_values(V);
  const auto cut = std::min<Eigen::Index>(static_cast<Eigen::Index>(2 * s), sigma.size());
  double head = 0.0, tail = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double v = sigma[i] > 0.0 ? std::pow(sigma[i], p) : 0.0;
    (i < cut ? head : tail) += v;
  }
  return tail - head;
}

NspResult nsp_check(const MeasurementOperator& A, std::size_t s, double p, std::size_t trials,
                    std::uint64_t seed, std::size_t refine_steps) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  if (s < 1 || 2 * s > A.n()) throw ParameterError("s", "must satisfy 1 <= 2s <= N");
  if (trials < 1) throw ParameterError("trials", "must be at least 1");
  const KernelBasis K = kernel_basis(A);
  if (K.dim() == 0) throw InputError("nsp_check: operator has a trivial kernel");

  NspResult res;
  res.trials = trials;
  std::vector<std::pair<double, Eigen::VectorXd>> samples;
  std::size_t passed = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    GaussianStream rng(seed, "nsp-sample", i);
    Eigen::VectorXd c = rng.vector(static_cast<Eigen::Index>(K.dim())).normalized();
    const double margin = normalized_nsp_margin(K.combine(c), s, p);
    if (margin >= 0.0) ++passed;
    samples.emplace_back(margin, std::move(c));
  }
  res.pass_fraction = static_cast<double>(passed) / static_cast<double>(trials);

  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t refine_count = std::min<std::size_t>(samples.size(), 10);
  res.worst_margin = samples.front().first;
  res.worst = K.combine(samples.front().second);
  auto f = [&](const Mat& V) { return normalized_nsp_margin(V, s, p); };
  auto g = [&](const Mat& V) { return nsp_gradient(V, s, p); };
  for (std::size_t i = 0; i < refine_count; ++i) {
    const Eigen::VectorXd c = local_search(K, samples[i].second, refine_steps, false, f, g);
    const Mat V = K.combine(c);
    const double margin = f(V);
    if (margin < res.worst_margin) {
      res.worst_margin = margin;
      res.worst = V;
    }
  }
  res.adversarial_pass = res.worst_margin >= 0.0;
  return res;
}

// ---------------------------------------------------------------------------

std::vector<Vec> extremal_profiles(std::size_t N, double p) {
  const auto n = static_cast<Eigen::Index>(N);
  std::vector<Vec> out;
  for (Eigen::Index j = 1; j <= n; ++j) {
    Vec sigma = Vec::Zero(n);
    // p = 1: unit S_1 norm; p < 1: unit weak norm.
    const double level = p >= 1.0 ? 1.0 / static_cast<double>(j)
                                  : std::pow(static_cast<double>(j), -1.0 / p);
    sigma.head(j).setConstant(level);
    out.push_back(std::move(sigma));
  }
  if (p < 1.0) {
    Vec sigma(n);
    for (Eigen::Index k = 0; k < n; ++k) sigma[k] = std::pow(static_cast<double>(k + 1), -1.0 / p);
    out.push_back(std::move(sigma));
  }
  return out;
}

namespace {

std::uint64_t cell_key(std::size_t N, std::size_t m, double p, double q) {
  std::uint64_t h = mix64(N);
  h = mix64(h ^ m);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(p));
  return mix64(h ^ std::bit_cast<std::uint64_t>(q));
}

// log(||X||_q / ||X||_p), the quantity kernel samples push up.
double log_norm_ratio(const Mat& X, double p, double q) {
  const Vec sigma = singular_values(X);
  if (sigma[0] <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(schatten_norm_of(sigma, q)) - std::log(schatten_norm_of(sigma, p));
}

Mat log_norm_ratio_gradient(const Mat& X, double p, double q) {
  const SvdFactors f = svd(X);
  const Eigen::Index n = X.rows();
  const double floor = 1e-10 * std::max(f.sigma[0], 1e-300);
  double pq = 0.0, pp = 0.0;
  Vec wq(n), wp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = std::max(f.sigma[i], floor);
    pq += std::pow(f.sigma[i], q);
    pp += std::pow(f.sigma[i], p);
    wq[i] = std::pow(sv, q - 1.0);
    wp[i] = std::pow(sv, p - 1.0);
  }
  const Vec w = wq / pq - wp / pp;
  return f.u * w.asDiagonal() * f.v.transpose();
}

// Unit-ball normalization: S_1 for p = 1, weak S_p otherwise.
double ball_norm(const Mat& X, double p) {
  return p >= 1.0 ? schatten_norm(X, 1.0) : weak_schatten_norm(X, p);
}

}  // namespace

WidthEstimate width_upper_bound(std::size_t N, std::size_t m, double p, double q,
                                std::size_t trials, std::uint64_t seed, const WidthOptions& opts) {
  if (N < 2) throw ParameterError("N", "must be at least 2");
  if (m < 1 || m > N * N) throw ParameterError("m", "must lie in [1, N^2]");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  if (!(q > p && q <= 2.0)) throw ParameterError("q", "must satisfy p < q <= 2");
  if (trials < 1) throw ParameterError("trials", "must be at least 1");
  if (!(opts.c_delta > 0.0)) throw ParameterError("c_delta", "must be positive");

  WidthEstimate est;
  est.N = N;
  est.m = m;
  est.p = p;
  est.q = q;
  est.r = std::min(1.0, q);
  est.trials = trials;
  est.seed = seed;
  const double Nd = static_cast<double>(N), md = static_cast<double>(m);
  est.theory = std::pow(std::min(1.0, Nd / md), 1.0 / p - 1.0 / q);
  est.zero_map = md < opts.c_delta * Nd && m < N * N;
  est.s = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(md / (opts.c_delta * Nd))));

  const std::uint64_t key = derive_seed(seed, "width-cell", cell_key(N, m, p, q));
  std::optional<MeasurementOperator> A;
  if (!est.zero_map) {
    A = gaussian_operator(N, m, derive_seed(key, "operator"));
    const std::size_t probe_rank = std::min(2 * est.s, N);
    const auto rc = estimate_restricted_constants(*A, probe_rank, opts.rip_trials,
                                                  opts.rip_refine_iters, derive_seed(key, "rip"));
    est.delta_hat_2s = rc.delta_hat ? *rc.delta_hat : 1.0;
  }

  const std::vector<Vec> profiles = extremal_profiles(N, p);
  std::vector<double> errors(trials, 0.0);
  std::vector<char> failed(trials, 0), chain_checked(trials, 0), chain_bad(trials, 0);
  const bool check_chain = est.delta_hat_2s && *est.delta_hat_2s <= 1.0 / 3.0;
  const double chain_factor = std::pow(2.0, 1.0 / est.r) * std::sqrt(2.0) *
                              std::pow(2.0 * opts.c_delta * Nd / md, 1.0 / est.r - 1.0 / q);
  parallel_for(trials, opts.threads, [&](std::size_t t) {
    GaussianStream rng(key, "width-sample", t);
    const auto n = static_cast<Eigen::Index>(N);
    const Mat U = random_orthogonal(rng, n);
    const Mat V = random_orthogonal(rng, n);
    const Mat X = U * profiles[t % profiles.size()].asDiagonal() * V.transpose();
    if (!A) {
      errors[t] = schatten_norm(X, q);
      return;
    }
    const SolveResult sol = recover(*A, apply(*A, X), est.r, 0.0, 0.0, opts.solver);
    failed[t] = !sol.converged;
    const Mat Z = X - sol.minimizer;
    errors[t] = schatten_norm(Z, q);
    if (check_chain) {
      chain_checked[t] = 1;
      chain_bad[t] = errors[t] > chain_factor * schatten_norm(Z, est.r) * (1.0 + 1e-9) + 1e-12;
    }
  });
  est.estimate = *std::max_element(errors.begin(), errors.end());
  if (A && opts.kernel_samples > 0) {
    // On ker A the data is 0 and so is the minimizer, so the error is ||X||_q.
    const KernelBasis K = kernel_basis(*A);
    if (K.dim() > 0) {
      std::vector<double> kerr(opts.kernel_samples, 0.0);
      auto f = [&](const Mat& X) { return log_norm_ratio(X, p, q); };
      auto g = [&](const Mat& X) { return log_norm_ratio_gradient(X, p, q); };
      parallel_for(opts.kernel_samples, opts.threads, [&](std::size_t t) {
        GaussianStream rng(key, "width-kernel-sample", t);
        const Eigen::VectorXd c0 = rng.vector(static_cast<Eigen::Index>(K.dim()));
        const Mat X = K.combine(local_search(K, c0, opts.kernel_refine_steps, true, f, g));
        kerr[t] = schatten_norm(X, q) / ball_norm(X, p);
      });
      est.kernel_estimate = *std::max_element(kerr.begin(), kerr.end());
      est.estimate = std::max(est.estimate, est.kernel_estimate);
    }
  }
  est.ratio = est.estimate / est.theory;
  est.solver_failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  est.chain_checked = static_cast<std::size_t>(std::count(chain_checked.begin(), chain_checked.end(), 1));
  est.chain_violations = static_cast<std::size_t>(std::count(chain_bad.begin(), chain_bad.end(), 1));
  return est;
}

WidthTable width_scaling_experiment(const std::vector<GridPoint>& grid, std::size_t trials,
                                    std::uint64_t seed, const WidthOptions& opts) {
  if (grid.empty()) throw ParameterError("grid", "must not be empty");
  WidthTable table;
  for (const auto& g : grid) table.rows.push_back(width_upper_bound(g.N, g.m, g.p, g.q, trials, seed, opts));

  std::map<std::tuple<std::size_t, double, double>, std::vector<const WidthEstimate*>> groups;
  for (const auto& row : table.rows) groups[{row.N, row.p, row.q}].push_back(&row);
  for (const auto& [key, rows] : groups) {
    WidthFit fit;
    std::tie(fit.N, fit.p, fit.q) = key;
    fit.theory_exponent = -(1.0 / fit.p - 1.0 / fit.q);
    std::vector<double> xs, ys;
    for (const auto* r : rows) {
      if (r->m > r->N && r->estimate > kFitFloor) {
        xs.push_back(std::log(static_cast<double>(r->m)));
        ys.push_back(std::log(r->estimate));
      }
    }
    fit.rows_used = xs.size();
    const bool distinct = !xs.empty() && std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs[0]; });
    if (xs.size() < 2 || !distinct) {
      fit.note = "not enough distinct m in the regime m > N";
    } else {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      fit.exponent = sxy / sxx;
      fit.note = "least squares on log estimate vs log m";
    }
    table.fits.push_back(fit);
  }
  return table;
}

std::string width_csv(const WidthTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "N,m,p,q,r,s,trials,estimate,theory,ratio,seed\n";
  for (const auto& r : table.rows) {
    out << r.N << ',' << r.m << ',' << r.p << ',' << r.q << ',' << r.r << ',' << r.s << ','
        << r.trials << ',' << r.estimate << ',' << r.theory << ',' << r.ratio << ',' << r.seed << '\n';
  }
  return out.str();
}

nlohmann::json width_metadata(const WidthTable& table, const WidthOptions& opts) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"N", r.N},
                    {"m", r.m},
                    {"zero_map", r.zero_map},
                    {"kernel_estimate", r.kernel_estimate},
                    {"delta_hat_2s", r.delta_hat_2s ? nlohmann::json(*r.delta_hat_2s) : nlohmann::json(nullptr)},
                    {"delta_hat_provenance", "probe-lower-estimate"},
                    {"chain_checked", r.chain_checked},
                    {"chain_violations", r.chain_violations},
                    {"solver_failures", r.solver_failures}});
  }
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : table.fits) {
    fits.push_back({{"N", f.N},
                    {"p", f.p},
                    {"q", f.q},
                    {"exponent", f.exponent ? nlohmann::json(*f.exponent) : nlohmann::json(nullptr)},
                    {"theory_exponent", f.theory_exponent},
                    {"rows_used", f.rows_used},
                    {"note", f.note}});
  }
  return {{"solver",
           {{"max_iters", opts.solver.max_iters},
            {"tol_residual", opts.solver.tol_residual},
            {"tol_change", opts.solver.tol_change},
            {"penalty", opts.solver.penalty}}},
          {"c_delta", opts.c_delta},
          {"rip_trials", opts.rip_trials},
          {"rip_refine_iters", opts.rip_refine_iters},
          {"kernel_samples", opts.kernel_samples},
          {"kernel_refine_steps", opts.kernel_refine_steps},
          {"rows", rows},
          {"fits", fits}};
}

std::pair<double, double> compressive_width_bracket(double d_m, double p) {
  if (!(d_m >= 0.0) || !std::isfinite(d_m)) throw ParameterError("d_m", "must be finite and >= 0");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  return {d_m, std::pow(2.0, 1.0 / p) * d_m};
}

// ---------------------------------------------------------------------------

CsPropertyReport mscsp_mwcsp_check(const MeasurementOperator& A, std::size_t s, std::size_t trials,
                                   std::uint64_t seed, const SolveOptions& solver) {
  if (s < 1 || s > A.n()) throw ParameterError("s", "must lie in [1, N]");
  if (trials < 1) throw ParameterError("trials", "must be at least 1");
  const auto n = static_cast<Eigen::Index>(A.n());
  CsPropertyReport rep;
  rep.s = s;
  rep.s_n_over_m = static_cast<double>(s * A.n()) / static_cast<double>(A.m());
  const double root_s = std::sqrt(static_cast<double>(s));

  auto evaluate = [&](const Mat& X, bool kernel) {
    CsPropertyRow row;
    row.kernel_sample = kernel;
    const Vec sigma = singular_values(X);
    row.rho_s_1 = best_rank_error_of(sigma, static_cast<Eigen::Index>(s), 1.0);
    row.norm_1 = sigma.sum();
    const SolveResult sol = recover_nuclear(A, apply(A, X), 0.0, 0.0, solver);
    row.solver_failed = !sol.converged;
    row.err_2 = (X - sol.minimizer).norm();
    row.weak = row.norm_1 > 0.0 ? row.err_2 * root_s / row.norm_1 : 0.0;
    if (row.rho_s_1 > 1e-12 * row.norm_1) {
      row.strong = row.err_2 * root_s / row.rho_s_1;
    } else {
      // rank <= s: recovery must be exact for the strong property.
      const bool exact = row.err_2 <= 1e-6 * std::max(1.0, X.norm());
      row.strong = exact ? 0.0 : std::numeric_limits<double>::infinity();
      if (exact) row.weak = 0.0;
    }
    return row;
  };

  for (std::size_t i = 0; i < trials; ++i) {
    GaussianStream rng(seed, "cs-property-sample", i);
    const Mat low = rng.matrix(n, static_cast<Eigen::Index>(s)) *
                    rng.matrix(n, static_cast<Eigen::Index>(s)).transpose();
    // Cycle through exact rank-s, small tails and heavy tails.
    const double tail_level = std::array<double, 4>{0.0, 0.01, 0.1, 1.0}[i % 4];
    Mat X = low / low.norm();
    if (tail_level > 0.0) {
      const Mat noise = rng.matrix(n, n);
      X += tail_level * noise / noise.norm();
    }
    rep.rows.push_back(evaluate(X, false));
  }

  const MwpResult mwp = mwp_constant(A, std::max<std::size_t>(trials, 1), 50, derive_seed(seed, "cs-mwp"));
  rep.c_mwp = mwp.constant;
  rep.c_mwp_rescaled = mwp.constant * std::sqrt(rep.s_n_over_m);
  if (mwp.witness.size() > 0) {
    rep.rows.push_back(evaluate(mwp.witness, true));
    rep.c_weak_kernel = rep.rows.back().weak;
  }

  for (const auto& row : rep.rows) {
    rep.c_strong = std::max(rep.c_strong, row.strong);
    rep.c_weak = std::max(rep.c_weak, row.weak);
    if (row.weak > row.strong * (1.0 + 1e-12) + 1e-15) rep.weak_le_strong = false;
    if (row.solver_failed) ++rep.solver_failures;
  }
  rep.mwp_le_weak = rep.c_mwp_rescaled <= rep.c_weak * (1.0 + 1e-6) + 1e-9;
  return rep;
}

nlohmann::json to_json(const NspResult& r) {
  return {{"pass_fraction", r.pass_fraction},
          {"worst_margin", r.worst_margin},
          {"adversarial_pass", r.adversarial_pass},
          {"trials", r.trials}};
}

nlohmann::json to_json(const CsPropertyReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); };
  return {{"s", r.s},
          {"s_N_over_m", r.s_n_over_m},
          {"C_strong", num(r.c_strong)},
          {"C_weak", num(r.c_weak)},
          {"C_mwp", r.c_mwp},
          {"C_mwp_rescaled", r.c_mwp_rescaled},
          {"C_weak_kernel", r.c_weak_kernel},
          {"weak_le_strong", r.weak_le_strong},
          {"mwp_le_weak", r.mwp_le_weak},
          {"solver_failures", r.solver_failures},
          {"rows", r.rows.size()}};
}

}  // namespace lowrank
