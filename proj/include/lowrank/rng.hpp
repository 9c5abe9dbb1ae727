#pragma once

#include "lowrank/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace lowrank {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream key from (seed, purpose, index). Streams
/// for different indices never depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(seed ^ hash_tag(purpose)) + mix64(index + 0x632be59bd9b4e019ULL));
}

/// Deterministic normal sampler over a derived stream.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key) : engine_(key) {}
  GaussianStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0)
      : engine_(derive_seed(seed, purpose, index)) {}

  double operator()(double stddev = 1.0) { return stddev * normal_(engine_); }

  Mat matrix(Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = (*this)(stddev);
    return out;
  }

  Vec vector(Eigen::Index n, double stddev = 1.0) {
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = (*this)(stddev);
    return out;
  }

  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Haar-distributed orthogonal n x n matrix (QR of a Gaussian with sign fix).
Mat random_orthogonal(GaussianStream& rng, Eigen::Index n);

}  // namespace lowrank
