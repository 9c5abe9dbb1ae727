#include "lowrank/errors.hpp"
#include "lowrank/schatten.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lowrank;
using testing::eigen_singular_values;
using testing::random_matrix;
using testing::random_rank;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return Mat(v.asDiagonal());
}

}  // namespace

TEST_SUITE("schatten") {
  TEST_CASE("svd of a diagonal matrix") {
    const SvdFactors f = svd(diag({2, 1}));
    CHECK(f.sigma[0] == doctest::Approx(2.0));
    CHECK(f.sigma[1] == doctest::Approx(1.0));
    CHECK((f.u.cwiseAbs() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f.v.cwiseAbs() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(svd(Mat::Zero(3, 3)).sigma.isZero(0.0));
  }

  TEST_CASE("svd factors are orthogonal, ordered and reconstruct X") {
    std::mt19937_64 gen(11);
    for (int k = 0; k < 50; ++k) {
      const Mat X = random_matrix(gen, 1 + k % 9);
      const SvdFactors f = svd(X);
      const auto n = X.rows();
      CHECK((f.u.transpose() * f.u - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((f.v.transpose() * f.v - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
      for (Eigen::Index i = 1; i < n; ++i) CHECK(f.sigma[i - 1] >= f.sigma[i]);
      CHECK((f.reconstruct() - X).norm() <= 1e-8 * std::max(1.0, X.norm()));
    }
  }

  TEST_CASE("singular values match the eigen oracle on X^T X") {
    std::mt19937_64 gen(12);
    const Mat X = random_matrix(gen, 5);
    const Vec a = singular_values(X), b = eigen_singular_values(X);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8);
  }

  TEST_CASE("non-finite input is rejected") {
    Mat X = Mat::Zero(2, 2);
    X(0, 1) = std::nan("");
    CHECK_THROWS_AS(svd(X), InputError);
    CHECK_THROWS_AS(svd(Mat::Zero(2, 3)), InputError);
  }

  TEST_CASE("schatten norm examples") {
    CHECK(schatten_norm(Mat::Identity(3, 3), 2.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(schatten_norm(diag({3, 4}), 1.0) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(schatten_norm(diag({3, 4}), kInfinity) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS(schatten_norm(Mat::Identity(2, 2), 0.0), ParameterError);
    CHECK_THROWS_AS(schatten_norm(Mat::Identity(2, 2), -1.0), ParameterError);

    std::mt19937_64 gen(13);
    const Mat X = random_matrix(gen, 4);
    const double oracle = std::pow(testing::eigen_schatten_power(X, 0.5), 2.0);
    CHECK(std::abs(schatten_norm(X, 0.5) - oracle) <= 1e-8 * oracle);
  }

  TEST_CASE("weak schatten norm examples") {
    CHECK(weak_schatten_norm(diag({4, 1}), 1.0) == doctest::Approx(4.0));
    CHECK(weak_schatten_norm(Mat::Identity(3, 3), 0.5) == doctest::Approx(9.0));

    std::mt19937_64 gen(14);
    const Mat X = random_matrix(gen, 6);
    const Vec s = eigen_singular_values(X);
    double brute = 0.0;
    for (Eigen::Index k = 0; k < 6; ++k) brute = std::max(brute, std::pow(double(k + 1), 1.5) * s[k]);
    CHECK(std::abs(weak_schatten_norm(X, 2.0 / 3.0) - brute) <= 1e-8 * brute);
  }

  TEST_CASE("spectral truncation") {
    CHECK((spectral_truncate(diag({3, 2, 1}), 1) - diag({3, 0, 0})).norm() < 1e-12);
    std::mt19937_64 gen(15);
    const Mat X = random_matrix(gen, 5);
    CHECK((spectral_truncate(X, 5) - X).norm() <= 1e-10);
    CHECK_THROWS_AS(spectral_truncate(X, 6), ParameterError);

    const Mat T = spectral_truncate(X, 2);
    CHECK(numerical_rank(T) <= 2);
    const double best = (X - T).norm();
    int beaten = 0;
    for (int k = 0; k < 1000; ++k) {
      // Competitors near and far from the optimum.
      Mat Y = k % 2 ? random_rank(gen, 5, 2) : Mat(spectral_truncate(T + 0.05 * random_matrix(gen, 5), 2));
      if ((X - Y).norm() < best - 1e-12) ++beaten;
    }
    CHECK(beaten == 0);
  }

  TEST_CASE("best rank error") {
    CHECK(best_rank_error(diag({3, 2, 1}), 1, 1.0) == doctest::Approx(3.0));
    CHECK(best_rank_error(diag({3, 2, 1}), 1, 2.0) == doctest::Approx(std::sqrt(5.0)));
    std::mt19937_64 gen(16);
    for (double p : {0.3, 0.5, 1.0, 2.0}) CHECK(best_rank_error(random_rank(gen, 6, 2), 2, p) <= 1e-10);
  }

  TEST_CASE("block split on a diagonal frame") {
    const SvdFactors frame = svd(diag({5, 4, 3}));
    const BlockSplit b = block_split(Mat::Identity(3, 3), frame, 2);
    CHECK((b.head - diag({1, 1, 0})).norm() < 1e-12);
    CHECK((b.tail - diag({0, 0, 1})).norm() < 1e-12);
    CHECK_THROWS_AS(block_split(Mat::Identity(3, 3), frame, 0), ParameterError);
    CHECK_THROWS_AS(block_split(Mat::Identity(3, 3), frame, 3), ParameterError);
  }

  TEST_CASE("block split invariants on random draws") {
    std::mt19937_64 gen(17);
    for (int k = 0; k < 200; ++k) {
      const Eigen::Index n = 3 + k % 6;
      const Eigen::Index s = 1 + k % (n - 1);
      const Mat Z = random_matrix(gen, n), X = random_matrix(gen, n);
      const SvdFactors frame = svd(X);
      const BlockSplit b = block_split(Z, frame, s);
      CHECK((b.head + b.tail - Z).norm() <= 1e-12 * std::max(1.0, Z.norm()));
      // Tail lives in the bottom-right block of the frame.
      const Mat inner = frame.u.transpose() * b.tail * frame.v;
      CHECK(inner.topRows(s).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(inner.leftCols(s).cwiseAbs().maxCoeff() <= 1e-10);
      // Rank of the head is at most 2s.
      const Vec hs = Eigen::BDCSVD<Eigen::MatrixXd>(Eigen::MatrixXd(b.head)).singularValues();
      Eigen::Index rank = 0;
      for (Eigen::Index i = 0; i < n; ++i) rank += hs[i] > 1e-9 * std::max(1.0, hs[0]);
      CHECK(rank <= std::min<Eigen::Index>(2 * s, n));
    }
  }

  TEST_CASE("tail blocks group singular values greedily") {
    // Frame = identity with s = 1; Z22 = diag(5,4,3,2,1).
    const SvdFactors frame = svd(diag({10, 0.5, 0.4, 0.3, 0.2, 0.1}));
    const Mat Z = diag({7, 5, 4, 3, 2, 1});
    const BlockSplit b = block_split(Z, frame, 1);
    const TailBlocks tb = tail_blocks(b.tail, frame, 1, 2);
    REQUIRE(tb.blocks.size() == 3);
    CHECK(tb.block_sigma[0][0] == doctest::Approx(5.0));
    CHECK(tb.block_sigma[0][1] == doctest::Approx(4.0));
    CHECK(tb.block_sigma[1][0] == doctest::Approx(3.0));
    CHECK(tb.block_sigma[1][1] == doctest::Approx(2.0));
    REQUIRE(tb.block_sigma[2].size() == 1);
    CHECK(tb.block_sigma[2][0] == doctest::Approx(1.0));
  }

  TEST_CASE("tail blocks: additivity, orthogonality, ordering and interlacing") {
    std::mt19937_64 gen(18);
    for (int k = 0; k < 200; ++k) {
      const Eigen::Index n = 4 + k % 5;
      const Eigen::Index s = 1 + k % 2;
      const Eigen::Index t = 1 + k % 3;
      const double p = k % 2 ? 0.5 : 1.0;
      const SvdFactors frame = svd(random_matrix(gen, n));
      const BlockSplit b = block_split(random_matrix(gen, n), frame, s);
      const TailBlocks tb = tail_blocks(b.tail, frame, s, t);

      Mat sum = Mat::Zero(n, n);
      double power_sum = 0.0;
      for (const auto& B : tb.blocks) {
        sum += B;
        power_sum += schatten_power(B, p);
        CHECK(numerical_rank(B) <= t);
      }
      CHECK((sum - b.tail).norm() <= 1e-10 * std::max(1.0, b.tail.norm()));
      CHECK(std::abs(power_sum - schatten_power(b.tail, p)) <= 1e-8 * std::max(1.0, power_sum));

      for (std::size_t i = 0; i < tb.blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < tb.blocks.size(); ++j) {
          const double joint = schatten_power(tb.blocks[i] + tb.blocks[j], p);
          const double split = schatten_power(tb.blocks[i], p) + schatten_power(tb.blocks[j], p);
          CHECK(std::abs(joint - split) <= 1e-8 * std::max(1.0, split));
        }
      }
      for (std::size_t i = 1; i < tb.blocks.size(); ++i) {
        CHECK(tb.block_sigma[i].maxCoeff() <= tb.block_sigma[i - 1].minCoeff() + 1e-12);
        const double lhs = tb.blocks[i].norm();
        const double rhs = std::pow(double(t), 0.5 - 1.0 / p) * schatten_norm(tb.blocks[i - 1], p);
        CHECK(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
      }
    }
  }

  TEST_CASE("norm laws hold on random instances") {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> up(0.05, 1.0);
    for (int k = 0; k < 300; ++k) {
      const Eigen::Index n = 2 + k % 10;
      const double p = up(gen);
      const Mat U = random_matrix(gen, n), V = random_matrix(gen, n);
      // p-triangle inequality.
      CHECK(schatten_power(U + V, p) <= schatten_power(U, p) + schatten_power(V, p) + 1e-9);
      // Comparison chain.
      CHECK(schatten_norm(U, 1.0) <= schatten_norm(U, p) * (1 + 1e-12));
      CHECK(schatten_norm(U, p) <= std::pow(double(n), 1.0 / p - 0.5) * U.norm() * (1 + 1e-12));
      // Weak norm is dominated by the strong one.
      CHECK(weak_schatten_norm(U, p) <= schatten_norm(U, p) * (1 + 1e-12));
    }
  }

  TEST_CASE("orthogonal additivity on block-diagonal pairs") {
    std::mt19937_64 gen(20);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Index n = 4 + k % 6, a = 1 + k % (n - 1);
      Mat B = Mat::Zero(n, n), C = Mat::Zero(n, n);
      B.topLeftCorner(a, a) = random_matrix(gen, a);
      C.bottomRightCorner(n - a, n - a) = random_matrix(gen, n - a);
      // Rotate both by the same orthogonal pair; B^T C = 0 and B C^T = 0 persist.
      lowrank::GaussianStream rng(static_cast<std::uint64_t>(k), "additivity");
      const Mat P = random_orthogonal(rng, n), Q = random_orthogonal(rng, n);
      B = P * B * Q.transpose();
      C = P * C * Q.transpose();
      REQUIRE((B.transpose() * C).cwiseAbs().maxCoeff() < 1e-10);
      for (double p : {0.25, 0.5, 0.8, 1.0}) {
        const double joint = schatten_power(B + C, p);
        CHECK(std::abs(joint - schatten_power(B, p) - schatten_power(C, p)) <= 1e-9 * std::max(1.0, joint));
      }
    }
  }

  TEST_CASE("classical approximation inequalities") {
    std::mt19937_64 gen(21);
    const std::array<std::pair<double, double>, 4> pq{{{0.5, 1.0}, {0.5, 2.0}, {1.0, 2.0}, {0.25, 0.75}}};
    for (int k = 0; k < 200; ++k) {
      const Eigen::Index n = 3 + k % 10;
      const auto [p, q] = pq[k % 4];
      const Mat X = random_matrix(gen, n);
      const Eigen::Index s = 1 + k % n;
      const double factor = std::pow(double(s), -(1.0 / p - 1.0 / q));
      const double D = std::pow(q / p - 1.0, -1.0 / q);
      const double rho = best_rank_error(X, s, q);
      CHECK(rho <= factor * schatten_norm(X, p) * (1 + 1e-9) + 1e-12);
      CHECK(rho <= D * factor * weak_schatten_norm(X, p) * (1 + 1e-9) + 1e-12);
    }
  }
}
