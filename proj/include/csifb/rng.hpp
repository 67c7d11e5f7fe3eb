#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace csifb {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Counter-mode stream derivation.
///
/// The seed of a stream is obtained by folding each path component into a
/// running SplitMix64 state:
///
///     s0 = mix64(master)
///     s_{i+1} = mix64(s_i ^ mix64(c_i + (i + 1) * 0x9E3779B97F4A7C15))
///
/// Distinct paths (geometry, realization, scheme, grid, purpose) yield
/// independent-looking seeds, and no stream is shared between work units.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Seeded random stream. Not thread-safe; give each task its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return normal_(engine_); }

  /// CN(0, variance): real and imaginary parts each N(0, variance / 2).
  std::complex<double> complex_normal(double variance = 1.0);

  Eigen::VectorXcd complex_normal_vector(Eigen::Index n, double variance = 1.0);
  Eigen::MatrixXcd complex_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                         double variance = 1.0);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace csifb
