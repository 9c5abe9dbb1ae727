#include "lowrank/kernels.hpp"

#include <atomic>

namespace lowrank::kernels {

namespace {

Isa probe() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2::compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::avx2;
  }
#endif
  return Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

Isa detected_isa() noexcept {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active_isa() == Isa::avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                   : scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  if (active_isa() == Isa::avx2) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

double sum_squares(std::span<const double> a) noexcept {
  return active_isa() == Isa::avx2 ? avx2::sum_squares(a.data(), a.size())
                                   : scalar::sum_squares(a.data(), a.size());
}

void gemv(std::span<const double> M, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) noexcept {
  const bool vec = active_isa() == Isa::avx2;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = M.data() + r * cols;
    y[r] = vec ? avx2::dot(row, x.data(), cols) : scalar::dot(row, x.data(), cols);
  }
}

void gemv_t(std::span<const double> M, std::size_t rows, std::size_t cols,
            std::span<const double> y, std::span<double> x) noexcept {
  const bool vec = active_isa() == Isa::avx2;
  for (std::size_t c = 0; c < cols; ++c) x[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (y[r] == 0.0) continue;
    const double* row = M.data() + r * cols;
    if (vec) {
      avx2::axpy(y[r], row, x.data(), cols);
    } else {
      scalar::axpy(y[r], row, x.data(), cols);
    }
  }
}

}  // namespace lowrank::kernels
