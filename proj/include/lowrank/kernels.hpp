#pragma once

// Data-parallel inner loops used by the dense measurement operator.
// Each kernel has a portable scalar reference and an AVX2/FMA variant;
// the variant is picked once at runtime from CPUID.

#include <cstddef>
#include <span>
#include <string_view>

namespace lowrank::kernels {

enum class Isa { scalar, avx2 };

/// Best instruction set supported by both the build and the running CPU.
Isa detected_isa() noexcept;

/// Instruction set the dispatching entry points currently use.
Isa active_isa() noexcept;

/// Pin the dispatcher (tests, benchmarks). Requests for an unavailable
/// ISA fall back to scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double sum_squares(const double* a, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double sum_squares(const double* a, std::size_t n) noexcept;
}  // namespace avx2

// Dispatching entry points. Spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
double sum_squares(std::span<const double> a) noexcept;

/// y = M x for a row-major rows x cols matrix.
void gemv(std::span<const double> M, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) noexcept;

/// x = M^T y for a row-major rows x cols matrix.
void gemv_t(std::span<const double> M, std::size_t rows, std::size_t cols,
            std::span<const double> y, std::span<double> x) noexcept;

}  // namespace lowrank::kernels
