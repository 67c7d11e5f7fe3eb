#include "csifb/rng.hpp"

#include <cmath>

namespace csifb {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = mix64(master);
  std::uint64_t position = 1;
  for (std::uint64_t component : path) {
    state = mix64(state ^ mix64(component + position * 0x9E3779B97F4A7C15ULL));
    ++position;
  }
  return state;
}

std::complex<double> Rng::complex_normal(double variance) {
  const double scale = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {scale * re, scale * im};
}

Eigen::VectorXcd Rng::complex_normal_vector(Eigen::Index n, double variance) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(variance);
  return v;
}

Eigen::MatrixXcd Rng::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                            double variance) {
  Eigen::MatrixXcd m(rows, cols);
  // column-major fill so results do not depend on Eigen's storage order flags
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal(variance);
  return m;
}

}  // namespace csifb
