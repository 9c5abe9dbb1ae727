#include "lowrank/errors.hpp"
#include "lowrank/schatten.hpp"
#include "lowrank/solvers.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lowrank;
using testing::random_matrix;
using testing::random_rank;

namespace {

double rel_error(const Mat& X, const Mat& X0) { return (X - X0).norm() / X0.norm(); }

Vec random_vector(std::mt19937_64& gen, Eigen::Index m) {
  std::normal_distribution<double> nd;
  Vec y(m);
  for (auto& v : y) v = nd(gen);
  return y;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("zero data gives the zero matrix") {
    const auto A = gaussian_operator(4, 9, 1);
    CHECK(recover_nuclear(A, Vec::Zero(9), 0.0, 0.0).minimizer.isZero(0.0));
    CHECK(recover_schatten_p(A, Vec::Zero(9), 0.5, 0.0, 0.0).minimizer.isZero(0.0));
  }

  TEST_CASE("parameter validation") {
    const auto A = gaussian_operator(3, 5, 1);
    const Vec y = Vec::Ones(5);
    CHECK_THROWS_AS(recover_schatten_p(A, y, 1.0, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(recover_schatten_p(A, y, 0.0, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(recover(A, y, 1.5, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(recover_nuclear(A, Vec::Ones(4), 0.0, 0.0), InputError);
    CHECK_THROWS_AS(recover_nuclear(A, y, -1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(recover_nuclear(A, y, 0.1, 0.0), ParameterError);
    SolveOptions bad;
    bad.tol_residual = 0.0;
    CHECK_THROWS_AS(recover_nuclear(A, y, 0.0, 0.0, bad), ParameterError);
    SolveOptions eps;
    eps.epsilon_schedule = {1.0, 1.0};
    CHECK_THROWS_AS(eps.validate(), ParameterError);
    eps.epsilon_schedule = {1.0, 1e-12};
    CHECK_THROWS_AS(eps.validate(), ParameterError);
  }

  TEST_CASE("planted rank-1 recovery at N = 8, m = 48 (nuclear norm)") {
    int ok = 0;
    const int seeds = 30;
    for (int seed = 0; seed < seeds; ++seed) {
      std::mt19937_64 gen(1000 + seed);
      const auto A = gaussian_operator(8, 48, static_cast<std::uint64_t>(seed));
      const Mat X0 = random_rank(gen, 8, 1);
      const SolveResult r = recover_nuclear(A, apply(A, X0), 0.0, 0.0);
      ok += r.converged && rel_error(r.minimizer, X0) <= 1e-4;
    }
    CHECK(ok >= 27);
  }

  TEST_CASE("planted rank-1 recovery at N = 8, m = 40 (p = 1/2)") {
    int ok = 0;
    const int seeds = 30;
    for (int seed = 0; seed < seeds; ++seed) {
      std::mt19937_64 gen(2000 + seed);
      const auto A = gaussian_operator(8, 40, static_cast<std::uint64_t>(seed));
      const Mat X0 = random_rank(gen, 8, 1);
      const SolveResult r = recover_schatten_p(A, apply(A, X0), 0.5, 0.0, 0.0);
      ok += rel_error(r.minimizer, X0) <= 1e-3;
      CHECK(r.status_note.find("local") != std::string::npos);
    }
    CHECK(ok >= 27);
  }

  TEST_CASE("nuclear objective matches the subgradient oracle at N = 3, m = 7") {
    for (int k = 0; k < 4; ++k) {
      std::mt19937_64 gen(3000 + k);
      const auto A = gaussian_operator(3, 7, static_cast<std::uint64_t>(k));
      const Vec y = random_vector(gen, 7);
      const SolveResult r = recover_nuclear(A, y, 0.0, 0.0);
      REQUIRE(r.converged);
      const double oracle = testing::subgradient_nuclear_oracle(A, y, 200000);
      CHECK(std::abs(r.objective - oracle) <= 1e-4 * oracle);
    }
  }

  TEST_CASE("oracle_recover_small: full measurements and agreement with the solvers") {
    std::mt19937_64 gen(4000);
    const auto F = full_vectorization(2, 1.0);
    const Mat X = random_matrix(gen, 2);
    for (double p : {0.5, 1.0}) CHECK((oracle_recover_small(F, apply(F, X), p) - X).norm() <= 1e-12);

    for (int k = 0; k < 5; ++k) {
      const auto A = gaussian_operator(2, 3, static_cast<std::uint64_t>(k));
      const Vec y = random_vector(gen, 3);
      const double grid1 = schatten_norm(oracle_recover_small(A, y, 1.0), 1.0);
      const SolveResult nuc = recover_nuclear(A, y, 0.0, 0.0);
      CHECK(std::abs(grid1 - nuc.objective) <= 1e-4 * std::max(1.0, grid1));

      const double gridh = schatten_norm(oracle_recover_small(A, y, 0.5), 0.5);
      const SolveResult half = recover_schatten_p(A, y, 0.5, 0.0, 0.0);
      CHECK(gridh <= half.objective + 1e-4 * std::max(1.0, half.objective));
    }
    CHECK_THROWS_AS(oracle_recover_small(gaussian_operator(4, 3, 0), Vec::Ones(3), 1.0), ParameterError);
  }

  TEST_CASE("oracle rejects inconsistent data") {
    // Two identical rows with different data cannot be met exactly.
    const auto A = entry_mask_operator(2, {{0, 0}, {1, 1}}, 1.0);
    const auto B = MeasurementOperator::dense(2, {1, 0, 0, 0, 1, 0, 0, 0});
    CHECK_THROWS_AS(oracle_recover_small(B, (Vec(2) << 1.0, 2.0).finished(), 1.0), InputError);
    CHECK_NOTHROW(oracle_recover_small(A, (Vec(2) << 1.0, 2.0).finished(), 1.0));
  }

  TEST_CASE("minimality against kernel perturbations (p = 1)") {
    std::mt19937_64 gen(5000);
    const auto A = gaussian_operator(5, 15, 9);
    const Vec y = random_vector(gen, 15);
    const SolveResult r = recover_nuclear(A, y, 0.0, 0.0);
    REQUIRE(r.converged);
    const FeasibleSet set(A, y, 0.0);
    const Eigen::MatrixXd K = set.kernel_basis();
    std::normal_distribution<double> nd;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd c(K.cols());
      for (auto& v : c) v = nd(gen);
      const Eigen::VectorXd d = K * c.normalized() * 1e-3;
      const Mat D = Eigen::Map<const Mat>(d.data(), 5, 5);
      CHECK(schatten_norm(r.minimizer + D, 1.0) >= r.objective - 1e-6);
    }
  }

  TEST_CASE("feasibility of converged results, exact and relaxed") {
    std::mt19937_64 gen(6000);
    for (int k = 0; k < 10; ++k) {
      const auto A = gaussian_operator(6, 24, static_cast<std::uint64_t>(k));
      const Vec y = random_vector(gen, 24);
      for (double p : {1.0, 0.5}) {
        const SolveResult exact = recover(A, y, p, 0.0, 0.0);
        if (exact.converged) CHECK(exact.residual <= SolveOptions{}.tol_residual * y.norm() + 1e-12);
        const double beta = 1.3, theta = 0.2;
        const SolveResult relaxed = recover(A, y, p, theta, beta);
        if (relaxed.converged) CHECK(relaxed.residual <= beta * theta + SolveOptions{}.tol_residual * std::max(1.0, y.norm()));
        CHECK(relaxed.budget == doctest::Approx(beta * theta));
      }
    }
  }

  TEST_CASE("budget covering the data returns zero") {
    const auto A = gaussian_operator(4, 8, 3);
    const Vec y = Vec::Constant(8, 0.1);
    const SolveResult r = recover_nuclear(A, y, y.norm(), 1.0);
    CHECK(r.minimizer.isZero(0.0));
    CHECK(r.converged);
  }

  TEST_CASE("scaling equivariance") {
    std::mt19937_64 gen(7000);
    const auto A = gaussian_operator(6, 26, 2);
    const Vec y = apply(A, random_rank(gen, 6, 2));
    for (double p : {1.0, 0.5}) {
      const SolveResult base = recover(A, y, p, 0.0, 0.0);
      for (double c : {1e-3, 7.0, 1e4}) {
        const SolveResult scaled = recover(A, c * y, p, 0.0, 0.0);
        CHECK((scaled.minimizer - c * base.minimizer).norm() <= 1e-8 * c * std::max(1.0, base.minimizer.norm()));
      }
    }
  }

  TEST_CASE("minimizer is no larger than any feasible point") {
    std::mt19937_64 gen(8000);
    for (int k = 0; k < 10; ++k) {
      const auto A = gaussian_operator(6, 20, static_cast<std::uint64_t>(k));
      const Mat X = random_rank(gen, 6, 2) + 0.05 * random_matrix(gen, 6);
      std::normal_distribution<double> nd;
      Vec e(20);
      for (auto& v : e) v = nd(gen);
      const double beta = 1.0, theta = 0.05;
      const Vec y = apply(A, X) + 0.5 * theta * e.normalized();
      for (double p : {1.0, 0.5}) {
        const SolveResult r = recover(A, y, p, theta, beta);
        if (!r.converged) continue;
        // X is feasible for the relaxed problem; for p < 1 only a local
        // minimizer is returned, so the check is one-sided evidence.
        CHECK(schatten_power(r.minimizer, p) <= schatten_power(X, p) + 1e-6);
      }
    }
  }

  TEST_CASE("IRLS never ends above its warm start") {
    std::mt19937_64 gen(9000);
    for (int k = 0; k < 10; ++k) {
      const auto A = gaussian_operator(6, 22, static_cast<std::uint64_t>(k));
      const Vec y = apply(A, random_rank(gen, 6, 2));
      const SolveResult warm = recover_nuclear(A, y, 0.0, 0.0);
      SolveOptions o;
      o.warm_start = warm.minimizer;
      const SolveResult r = recover_schatten_p(A, y, 0.5, 0.0, 0.0, o);
      if (r.converged) CHECK(r.objective <= schatten_norm(warm.minimizer, 0.5) + 1e-8);
    }
  }

  TEST_CASE("trace recording and serialization") {
    std::mt19937_64 gen(9100);
    const auto A = gaussian_operator(4, 12, 1);
    const Vec y = apply(A, random_rank(gen, 4, 1));
    SolveOptions o;
    o.record_trace = true;
    const SolveResult r = recover_nuclear(A, y, 0.0, 0.0, o);
    CHECK(r.trace.size() == r.iterations);
    const std::string csv = trace_csv(r);
    CHECK(csv.rfind("iter,objective,residual\n", 0) == 0);
    const auto j = to_json(r);
    for (const char* key : {"objective", "residual", "iterations", "converged", "status_note", "minimizer"})
      CHECK(j.contains(key));
    CHECK(!to_json(r, false).contains("minimizer"));
  }

  TEST_CASE("iteration cap yields converged = false, not a wrong answer") {
    std::mt19937_64 gen(9200);
    const auto A = gaussian_operator(6, 20, 4);
    const Vec y = apply(A, random_rank(gen, 6, 2));
    SolveOptions o;
    o.max_iters = 2;
    const SolveResult r = recover_nuclear(A, y, 0.0, 0.0, o);
    CHECK(!r.converged);
    CHECK(r.status_note.find("max_iters") != std::string::npos);
  }

  TEST_CASE("polish never worsens irls and keeps feasibility") {
    for (int k = 0; k < 10; ++k) {
      const auto A = gaussian_operator(3, 7, static_cast<std::uint64_t>(100 + k));
      GaussianStream rng(7, "polish", static_cast<std::uint64_t>(k));
      const Vec y = rng.vector(7);
      SolveOptions raw;
      raw.polish = false;
      const SolveResult a = recover_schatten_p(A, y, 0.5, 0.0, 0.0, raw);
      const SolveResult b = recover_schatten_p(A, y, 0.5, 0.0, 0.0);
      CHECK(b.objective <= a.objective * (1.0 + 1e-12));
      CHECK(b.residual <= 1e-7 * y.norm());
    }
    SolveOptions bad;
    bad.epsilon_hold = 0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
  }

  TEST_CASE("grid oracle agrees with admm at N = 3") {
    for (int k = 0; k < 6; ++k) {
      const auto A = gaussian_operator(3, 7, static_cast<std::uint64_t>(200 + k));
      GaussianStream rng(8, "grid", static_cast<std::uint64_t>(k));
      const Vec y = rng.vector(7);
      const double grid = schatten_norm(oracle_recover_small(A, y, 1.0), 1.0);
      const double admm = recover_nuclear(A, y, 0.0, 0.0).objective;
      CHECK(std::abs(grid - admm) <= 1e-6 * admm);
    }
  }
}
