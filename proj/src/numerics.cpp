#include "csifb/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace csifb {

namespace {

std::vector<double> positive_descending(const RVector& values) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) {
    if (!(values(i) >= 0.0)) {
      std::ostringstream msg;
      msg << "negative or NaN spectrum value " << values(i) << " at index " << i;
      throw ConfigError(msg.str());
    }
    if (values(i) > 0.0) out.push_back(values(i));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

void normalize_phases(CMatrix& basis) {
  for (Index c = 0; c < basis.cols(); ++c) {
    for (Index r = 0; r < basis.rows(); ++r) {
      const double mag = std::abs(basis(r, c));
      if (mag > 1e-12) {
        basis.col(c) *= std::conj(basis(r, c)) / mag;
        basis(r, c) = Complex(std::abs(basis(r, c)), 0.0);
        break;
      }
    }
  }
}

Spectrum hermitian_eig(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("hermitian_eig: matrix is not square");
  Spectrum out;
  if (a.rows() == 0) return out;
  const double scale = std::max(1.0, a.norm());
  const double skew = (a - a.adjoint()).norm();
  if (!(skew <= 1e-10 * scale)) {
    std::ostringstream msg;
    msg << "hermitian_eig: input is not Hermitian (|A - A^H| = " << skew << ")";
    throw NumericError(msg.str());
  }
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("hermitian_eig: eigensolver failed");
  const Index n = a.rows();
  out.values.resize(n);
  out.basis.resize(n, n);
  // Eigen returns ascending order
  for (Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.basis.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  normalize_phases(out.basis);
  return out;
}

Spectrum psd_eig(const CMatrix& a) {
  Spectrum s = hermitian_eig(a);
  if (s.size() == 0) return s;
  const double top = std::max(s.values(0), 0.0);
  const double floor = -kClampTolerance * top;
  for (Index i = 0; i < s.size(); ++i) {
    if (s.values(i) < 0.0) {
      if (s.values(i) < floor && s.values(i) < -std::numeric_limits<double>::min()) {
        std::ostringstream msg;
        msg << "matrix is not positive semidefinite: eigenvalue " << s.values(i)
            << " below clamp floor " << floor;
        throw NumericError(msg.str());
      }
      s.values(i) = 0.0;
    }
  }
  return s;
}

Index numeric_rank(const RVector& values) {
  if (values.size() == 0) return 0;
  const double top = values.maxCoeff();
  if (!(top > 0.0)) return 0;
  Index r = 0;
  for (Index i = 0; i < values.size(); ++i)
    if (values(i) > kRankTolerance * top) ++r;
  return r;
}

CMatrix psd_closure(const CMatrix& a) {
  const Spectrum s = psd_eig(a);
  if (s.size() == 0) return a;
  return s.basis * s.values.asDiagonal() * s.basis.adjoint();
}

CMatrix psd_factor(const CMatrix& c) {
  const Spectrum s = psd_eig(c);
  const Index r = numeric_rank(s.values);
  CMatrix f = s.basis.leftCols(r);
  for (Index i = 0; i < r; ++i) f.col(i) *= std::sqrt(s.values(i));
  return f;
}

CVector sample_from_covariance(const CMatrix& c, Rng& rng) {
  const CMatrix f = psd_factor(c);
  if (f.cols() == 0) return CVector::Zero(c.rows());
  return f * rng.complex_normal_vector(f.cols());
}

CMatrix psd_pinv(const CMatrix& a, double rel_tol) {
  const Spectrum s = psd_eig(a);
  if (s.size() == 0) return a;
  const double top = s.values(0);
  CMatrix out = CMatrix::Zero(a.rows(), a.cols());
  if (!(top > 0.0)) return out;
  for (Index i = 0; i < s.size(); ++i) {
    if (s.values(i) <= rel_tol * top) break;
    out.noalias() += (1.0 / s.values(i)) * s.basis.col(i) * s.basis.col(i).adjoint();
  }
  return out;
}

double waterfill_rate(const RVector& values, double gamma) {
  double rate = 0.0;
  for (Index i = 0; i < values.size(); ++i)
    if (values(i) > gamma && values(i) > 0.0) rate += std::log2(values(i) / gamma);
  return rate;
}

double waterfill_distortion(const RVector& values, double gamma) {
  double d = 0.0;
  for (Index i = 0; i < values.size(); ++i) d += std::min(gamma, std::max(values(i), 0.0));
  return d;
}

double reverse_waterfill_log2(const RVector& values, double rate_bits) {
  if (!(rate_bits >= 0.0)) throw ConfigError("reverse_waterfill: rate must be nonnegative");
  const std::vector<double> lam = positive_descending(values);
  if (lam.empty()) {
    if (rate_bits > 0.0) throw ConfigError("reverse_waterfill: all values are zero");
    return -std::numeric_limits<double>::infinity();
  }
  if (rate_bits == 0.0) return std::log2(lam.front());
  // The rate is piecewise linear in log2(gamma); on the active set {1..m}
  // the equation has the closed-form root below. Exactly one m is consistent.
  double log_sum = 0.0;
  const std::size_t n = lam.size();
  for (std::size_t m = 1; m <= n; ++m) {
    log_sum += std::log2(lam[m - 1]);
    const double log_gamma = (log_sum - rate_bits) / static_cast<double>(m);
    if (m == n || log_gamma >= std::log2(lam[m])) return log_gamma;
  }
  return -std::numeric_limits<double>::infinity();  // unreachable
}

double reverse_waterfill(const RVector& values, double rate_bits) {
  return std::exp2(reverse_waterfill_log2(values, rate_bits));
}

double waterfill_threshold_for_distortion(const RVector& values, double distortion) {
  std::vector<double> lam = positive_descending(values);
  std::reverse(lam.begin(), lam.end());
  const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
  if (!(distortion >= 0.0) || distortion > total * (1.0 + 1e-12))
    throw ConfigError("waterfill_threshold_for_distortion: distortion outside [0, sum values]");
  if (lam.empty()) return 0.0;
  if (distortion >= total) return lam.back();
  // ascending: sum_{i<j} lam_i + gamma * (n - j) on [lam_{j-1}, lam_j]
  double below = 0.0;
  const std::size_t n = lam.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double gamma = (distortion - below) / static_cast<double>(n - j);
    if (gamma <= lam[j]) return gamma;
    below += lam[j];
  }
  return lam.back();
}

double ecsq_rate(const RVector& values, double gamma) {
  double rate = 0.0;
  for (Index i = 0; i < values.size(); ++i)
    if (values(i) > gamma && values(i) > 0.0) rate += std::log2(values(i) / gamma) + kEcsqOverheadBits;
  return rate;
}

double ecsq_threshold(const RVector& values, double rate_bits) {
  if (!(rate_bits >= 0.0)) throw ConfigError("ecsq_threshold: rate must be nonnegative");
  const std::vector<double> lam = positive_descending(values);
  if (lam.empty()) return 0.0;
  double log_sum = 0.0;
  const std::size_t n = lam.size();
  for (std::size_t m = 1; m <= n; ++m) {
    log_sum += std::log2(lam[m - 1]);
    const double log_gamma =
        (log_sum + kEcsqOverheadBits * static_cast<double>(m) - rate_bits) / static_cast<double>(m);
    // m coefficients are not affordable: stop right at the m-th eigenvalue
    if (log_gamma >= std::log2(lam[m - 1])) return lam[m - 1];
    if (m == n || log_gamma >= std::log2(lam[m])) return std::exp2(log_gamma);
  }
  return 0.0;  // unreachable
}

double TklAllocation::used_power() const {
  return (alpha.array() * (lambda_bar.array() + 1.0)).sum();
}

double TklAllocation::objective() const { return tkl_objective(rho, lambda_bar, alpha); }

double tkl_objective(const RVector& rho, const RVector& lambda_bar, const RVector& alpha) {
  double f = 0.0;
  for (Index i = 0; i < alpha.size(); ++i)
    f += rho(i) * alpha(i) * lambda_bar(i) / (alpha(i) * (lambda_bar(i) + 1.0) + 1.0);
  return f;
}

TklAllocation tkl_waterfill(const RVector& rho, const RVector& lambda_bar, double uplink_power) {
  if (rho.size() != lambda_bar.size()) throw ConfigError("tkl_waterfill: size mismatch");
  if (!(uplink_power >= 0.0)) throw ConfigError("tkl_waterfill: power must be nonnegative");
  const Index n = rho.size();
  TklAllocation out;
  out.rho = rho;
  out.lambda_bar = lambda_bar;
  out.alpha = RVector::Zero(n);

  // with beta_i = alpha_i (lb_i + 1) the problem is max sum t_i beta_i / (beta_i + 1),
  // sum beta_i = P, whose KKT point is beta_i = [sqrt(t_i / gamma) - 1]_+
  RVector t(n);
  for (Index i = 0; i < n; ++i) {
    if (!(rho(i) >= 0.0) || !(lambda_bar(i) >= 0.0))
      throw ConfigError("tkl_waterfill: rho and lambda_bar must be nonnegative");
    t(i) = rho(i) * lambda_bar(i) / (lambda_bar(i) + 1.0);
  }
  out.informative = n > 0 && t.maxCoeff() > 0.0;
  if (!out.informative) return out;
  if (uplink_power == 0.0) {
    out.gamma_star = t.maxCoeff();
    return out;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return t(a) > t(b); });

  double root_sum = 0.0;
  double gamma = 0.0;
  for (std::size_t m = 1; m <= order.size(); ++m) {
    const double tm = t(order[m - 1]);
    if (tm <= 0.0) break;
    root_sum += std::sqrt(tm);
    const double sq = root_sum / (uplink_power + static_cast<double>(m));
    gamma = sq * sq;
    if (m == order.size() || t(order[m]) <= gamma) break;
  }
  out.gamma_star = gamma;
  for (Index i = 0; i < n; ++i) {
    const double beta = std::max(std::sqrt(t(i) / gamma) - 1.0, 0.0);
    out.alpha(i) = beta / (1.0 + lambda_bar(i));
  }
  return out;
}

LinearPosterior gaussian_posterior(const RVector& prior_variances, const CMatrix& h_eff,
                                   const CMatrix& noise_cov) {
  const Index r = prior_variances.size();
  if (h_eff.cols() != r) throw ConfigError("gaussian_posterior: H columns != prior size");
  if (noise_cov.rows() != h_eff.rows() || noise_cov.cols() != h_eff.rows())
    throw ConfigError("gaussian_posterior: noise covariance has wrong shape");
  const RVector sd = prior_variances.cwiseMax(0.0).cwiseSqrt();

  LinearPosterior out;
  if (h_eff.rows() == 0 || r == 0) {
    out.error_cov = CMatrix(prior_variances.cwiseMax(0.0).asDiagonal());
    out.estimate_cov = CMatrix::Zero(r, r);
    out.gain = CMatrix::Zero(r, h_eff.rows());
    return out;
  }

  Eigen::LLT<CMatrix> chol(0.5 * (noise_cov + noise_cov.adjoint()));
  if (chol.info() != Eigen::Success)
    throw NumericError("gaussian_posterior: noise covariance is not positive definite");
  const CMatrix hw = chol.matrixL().solve(h_eff);

  Eigen::JacobiSVD<CMatrix> svd(hw, Eigen::ComputeFullV);
  const CMatrix& v = svd.matrixV();
  RVector s = RVector::Zero(r);
  for (Index i = 0; i < svd.singularValues().size(); ++i) s(i) = svd.singularValues()(i) * svd.singularValues()(i);

  const RVector keep = (s.array() + 1.0).inverse().matrix();
  const RVector gain_diag = s.cwiseProduct(keep);
  const CMatrix sv = sd.asDiagonal() * v;
  out.error_cov = sv * keep.asDiagonal() * sv.adjoint();
  out.estimate_cov = sv * gain_diag.asDiagonal() * sv.adjoint();
  // E[x | obs] = D^{1/2} (I + J)^{-1} Hw^H L^{-1} obs
  const CMatrix whitened_adj = chol.matrixL().adjoint().solve(hw).adjoint();  // Hw^H L^{-1}
  out.gain = sv * keep.asDiagonal() * (v.adjoint() * whitened_adj);
  return out;
}

}  // namespace csifb
