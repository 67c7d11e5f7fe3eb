#pragma once

// Reference computations for the tests. Everything here works on dense
// matrices with textbook formulas and avoids the library's reduced-basis
// and information-form machinery on purpose.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "csifb/model.hpp"
#include "csifb/numerics.hpp"

namespace oracle {

using csifb::CMatrix;
using csifb::Complex;
using csifb::CVector;
using csifb::Index;
using csifb::RVector;

inline csifb::SystemConfig small_config(double snr_dl = 10.0, int users = 1) {
  csifb::SystemConfig cfg;
  cfg.antennas = 4;
  cfg.subcarriers = 2;
  cfg.users = users;
  cfg.pilot_symbols = 2;
  cfg.coherence_symbols = 10;
  cfg.pilot_subcarriers = {0, 1};
  cfg.snr_dl = snr_dl;
  return cfg;
}

// C = sum_l gamma_l (b b^H) kron (a a^H), built entry by entry
inline CMatrix dense_covariance(const csifb::ChannelGeometry& geo, const csifb::SystemConfig& cfg) {
  const int m = cfg.antennas, n = cfg.subcarriers;
  CMatrix c = CMatrix::Zero(m * n, m * n);
  for (const auto& p : geo.paths) {
    CVector v(m * n);
    for (int sub = 0; sub < n; ++sub)
      for (int ant = 0; ant < m; ++ant) {
        const double phase = std::numbers::pi * ant * std::sin(p.angle_rad) -
                             2.0 * std::numbers::pi * sub * cfg.subcarrier_spacing_hz * p.delay_s;
        v(sub * m + ant) = std::polar(1.0, phase);
      }
    c += p.power * v * v.adjoint();
  }
  return c;
}

inline double tr(const CMatrix& a) { return a.trace().real(); }

// C X^H (X C X^H + I)^{-1} X C via an LU solve
inline CMatrix mmse_estimate_cov(const CMatrix& c, const CMatrix& x) {
  const CMatrix cy = x * c * x.adjoint() + CMatrix::Identity(x.rows(), x.rows());
  const CMatrix chy = c * x.adjoint();
  return chy * cy.partialPivLu().solve(chy.adjoint());
}

// Linear MMSE estimate covariance C_hz C_z^{-1} C_hz^H for z = G y + n_ul,
// y = X h + n, n_ul ~ CN(0, I).
inline CMatrix linear_feedback_estimate_cov(const CMatrix& c, const CMatrix& x, const CMatrix& g) {
  const Index b = x.rows();
  const CMatrix chz = c * x.adjoint() * g.adjoint();
  const CMatrix cz = g * (x * c * x.adjoint() + CMatrix::Identity(b, b)) * g.adjoint() +
                     CMatrix::Identity(g.rows(), g.rows());
  return chz * cz.partialPivLu().solve(chz.adjoint());
}

// Eigenvalues of a Hermitian matrix from Eigen's self-adjoint solver, descending.
inline RVector eigenvalues_desc(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  RVector v = es.eigenvalues().reverse();
  return v;
}

// Real det(A - x I) of a Hermitian matrix through LU.
inline double char_poly(const CMatrix& a, double x) {
  const CMatrix m = a - x * CMatrix::Identity(a.rows(), a.cols());
  return m.partialPivLu().determinant().real();
}

// Plain bisection on a monotone scalar function, f(lo) and f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 300) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of the characteristic polynomial by a sign scan plus bisection,
// descending. Assumes distinct eigenvalues (true for random draws).
inline RVector char_poly_roots(const CMatrix& a, int grid = 20000) {
  const double bound = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  std::vector<double> roots;
  double prev_x = -bound, prev = char_poly(a, prev_x);
  for (int i = 1; i <= grid; ++i) {
    const double x = -bound + 2.0 * bound * i / grid;
    const double v = char_poly(a, x);
    if ((v > 0) != (prev > 0)) roots.push_back(bisect([&](double z) { return char_poly(a, z); }, prev_x, x, 200));
    prev_x = x;
    prev = v;
  }
  std::sort(roots.rbegin(), roots.rend());
  return Eigen::Map<RVector>(roots.data(), static_cast<Index>(roots.size()));
}

inline double rate_at(const RVector& lam, double log2_gamma) {
  double r = 0.0;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) > 0.0) r += std::max(std::log2(lam(i)) - log2_gamma, 0.0);
  return r;
}

// reverse water-filling by bisection on log2(gamma)
inline double reverse_waterfill_log2(const RVector& lam, double rate) {
  const double top = std::log2(lam.maxCoeff());
  const double lo = std::log2(lam.maxCoeff()) - rate - 10.0 - std::abs(std::log2(lam.minCoeff()));
  return bisect([&](double lg) { return rate_at(lam, lg) - rate; }, lo, top);
}

// TKL objective maximized by a zooming grid search over beta on the simplex
// sum beta = P, beta >= 0 (alpha_i = beta_i / (lb_i + 1)).
inline double tkl_grid_max(const RVector& t, double power) {
  const Index n = t.size();
  auto value = [&](const std::vector<double>& beta) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += t(i) * beta[static_cast<std::size_t>(i)] / (beta[static_cast<std::size_t>(i)] + 1.0);
    return s;
  };
  // initial grid: coordinates 0..n-2 on a uniform lattice, last takes the rest
  std::vector<double> centre(static_cast<std::size_t>(n), power / static_cast<double>(n));
  double best = value(centre);
  double width = power;
  const int steps = 12;
  for (int round = 0; round < 60; ++round) {
    std::vector<double> best_beta = centre;
    std::vector<int> idx(static_cast<std::size_t>(n - 1), 0);
    const double h = width / steps;
    for (;;) {
      std::vector<double> beta(static_cast<std::size_t>(n));
      double used = 0.0;
      bool ok = true;
      for (Index i = 0; i + 1 < n; ++i) {
        const double b = centre[static_cast<std::size_t>(i)] + (idx[static_cast<std::size_t>(i)] - steps / 2) * h;
        if (b < 0.0) ok = false;
        beta[static_cast<std::size_t>(i)] = std::max(b, 0.0);
        used += beta[static_cast<std::size_t>(i)];
      }
      beta[static_cast<std::size_t>(n - 1)] = power - used;
      if (ok && beta[static_cast<std::size_t>(n - 1)] >= 0.0) {
        const double v = value(beta);
        if (v > best) {
          best = v;
          best_beta = beta;
        }
      }
      Index k = 0;
      while (k < n - 1 && ++idx[static_cast<std::size_t>(k)] > steps) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == n - 1) break;
    }
    centre = best_beta;
    width *= 0.6;
  }
  return best;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  MeanSe out;
  const double n = static_cast<double>(x.size());
  for (double v : x) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace oracle
