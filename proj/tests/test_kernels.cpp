#include "lowrank/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace lowrank::kernels;

namespace {

std::vector<double> draw(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

// Summation order differs between paths; bound by n * eps * sum |a_i b_i|.
double reorder_tolerance(const std::vector<double>& a, const std::vector<double>& b) {
  double mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mag += std::abs(a[i] * b[i]);
  return 4.0 * static_cast<double>(a.size() + 1) * 2.2e-16 * mag + 1e-300;
}

struct IsaGuard {
  Isa saved = active_isa();
  ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar dot matches a plain loop") {
    std::mt19937_64 gen(1);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1000u}) {
      const auto a = draw(gen, n), b = draw(gen, n);
      double ref = 0.0;
      for (std::size_t i = 0; i < n; ++i) ref += a[i] * b[i];
      CHECK(std::abs(scalar::dot(a.data(), b.data(), n) - ref) <= reorder_tolerance(a, b));
    }
  }

  TEST_CASE("avx2 and scalar paths agree on every length and alignment") {
    if (!avx2::compiled() || detected_isa() != Isa::avx2) {
      MESSAGE("avx2 not available on this machine; scalar only");
      return;
    }
    std::mt19937_64 gen(2);
    for (std::size_t n = 0; n < 70; ++n) {
      for (std::size_t offset = 0; offset < 3; ++offset) {
        auto a = draw(gen, n + offset), b = draw(gen, n + offset);
        const double* pa = a.data() + offset;
        const double* pb = b.data() + offset;
        std::vector<double> sa(pa, pa + n), sb(pb, pb + n);
        CHECK(std::abs(avx2::dot(pa, pb, n) - scalar::dot(pa, pb, n)) <= reorder_tolerance(sa, sb));
        CHECK(std::abs(avx2::sum_squares(pa, n) - scalar::sum_squares(pa, n)) <=
              reorder_tolerance(sa, sa));

        std::vector<double> y1(pb, pb + n), y2 = y1;
        scalar::axpy(0.37, pa, y1.data(), n);
        avx2::axpy(0.37, pa, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (1 + std::abs(y1[i])));
      }
    }
  }

  TEST_CASE("gemv and gemv_t agree across isa selections") {
    IsaGuard guard;
    std::mt19937_64 gen(3);
    const std::size_t rows = 13, cols = 37;
    const auto M = draw(gen, rows * cols), x = draw(gen, cols), z = draw(gen, rows);
    std::vector<double> y_s(rows), y_v(rows), t_s(cols), t_v(cols);
    set_active_isa(Isa::scalar);
    gemv(M, rows, cols, x, y_s);
    gemv_t(M, rows, cols, z, t_s);
    set_active_isa(detected_isa());
    gemv(M, rows, cols, x, y_v);
    gemv_t(M, rows, cols, z, t_v);
    for (std::size_t i = 0; i < rows; ++i) CHECK(y_s[i] == doctest::Approx(y_v[i]).epsilon(1e-13));
    for (std::size_t j = 0; j < cols; ++j) CHECK(t_s[j] == doctest::Approx(t_v[j]).epsilon(1e-13));

    // Against an explicit loop.
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += M[i * cols + j] * x[j];
      CHECK(y_s[i] == doctest::Approx(acc).epsilon(1e-13));
    }
  }

  TEST_CASE("isa selection is reported and clamped to what the cpu supports") {
    IsaGuard guard;
    CHECK(isa_name(Isa::scalar) == "scalar");
    CHECK(isa_name(Isa::avx2) == "avx2");
    set_active_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    set_active_isa(Isa::avx2);
    CHECK(active_isa() == detected_isa());
  }
}
