#pragma once

#include <complex>

#include <Eigen/Dense>

#include "csifb/errors.hpp"
#include "csifb/rng.hpp"

namespace csifb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Eigen::Index;

/// Relative threshold below which eigenvalues are treated as zero (rank, pinv).
inline constexpr double kRankTolerance = 1e-10;
/// Negative eigenvalues down to -kClampTolerance * lambda_max are clamped to zero.
inline constexpr double kClampTolerance = 1e-10;
/// Rate overhead of entropy-coded scalar quantization per encoded coefficient.
inline constexpr double kEcsqOverheadBits = 1.508;

/// Eigenvalues in descending order with the matching eigenvectors as columns.
/// `basis` may be empty when only the values are of interest.
struct Spectrum {
  RVector values;
  CMatrix basis;

  Index size() const { return values.size(); }
  bool has_basis() const { return basis.cols() == values.size() && basis.size() > 0; }
};

/// Hermitian eigendecomposition, descending order.
///
/// Each eigenvector is rotated so that its first component with magnitude
/// above 1e-12 is real and positive; for a fixed input the result is fully
/// deterministic. Throws NumericError if `a` is not Hermitian to 1e-10
/// relative (Frobenius norm).
Spectrum hermitian_eig(const CMatrix& a);

/// Rotate each column so its first component above 1e-12 in magnitude is real positive.
void normalize_phases(CMatrix& basis);

/// Eigendecomposition of a PSD matrix with small negative eigenvalues clamped.
/// Throws NumericError when an eigenvalue is below -kClampTolerance * lambda_max.
Spectrum psd_eig(const CMatrix& a);

/// Number of eigenvalues above kRankTolerance * max(values).
Index numeric_rank(const RVector& descending_values);

/// Symmetrize and clamp tiny negative eigenvalues of a nominally PSD matrix.
CMatrix psd_closure(const CMatrix& a);

/// Factor F with F F^H = C, keeping only numerically nonzero directions.
CMatrix psd_factor(const CMatrix& c);

/// One draw of CN(0, C).
CVector sample_from_covariance(const CMatrix& c, Rng& rng);

/// Moore-Penrose inverse of a PSD matrix on its numeric range.
CMatrix psd_pinv(const CMatrix& a, double rel_tol = kRankTolerance);

// -- reverse water-filling (remote distortion-rate) -------------------------

/// Sum_i [log2(values_i / gamma)]_+ ; zero values never contribute.
double waterfill_rate(const RVector& values, double gamma);
/// Sum_i min(gamma, values_i).
double waterfill_distortion(const RVector& values, double gamma);

/// Threshold gamma with Sum_i [log2(values_i/gamma)]_+ = rate_bits.
/// rate_bits = 0 returns max(values). For very large rates gamma can
/// underflow to 0, which is the correct limit for the distortion.
double reverse_waterfill(const RVector& values, double rate_bits);

/// Same as reverse_waterfill but returns log2(gamma), which never underflows.
double reverse_waterfill_log2(const RVector& values, double rate_bits);

/// Threshold gamma_tilde with Sum_i min(gamma_tilde, values_i) = distortion.
/// `distortion` must lie in [0, Sum values].
double waterfill_threshold_for_distortion(const RVector& values, double distortion);

// -- entropy-coded scalar quantization ----------------------------------------

/// Rate charged by ECSQ at threshold gamma: water-filling rate plus 1.508
/// bits for every coefficient strictly above gamma.
double ecsq_rate(const RVector& values, double gamma);

/// Smallest gamma with ecsq_rate(values, gamma) <= rate_bits.
///
/// The rate is a nonincreasing function of gamma with upward jumps of 1.508
/// bits each time gamma drops below an eigenvalue, so equality is not always
/// attainable. Active-set sizes are scanned; the returned threshold solves the
/// continuous equation on the largest affordable set, or sits at the next
/// eigenvalue when the budget falls inside a jump.
double ecsq_threshold(const RVector& values, double rate_bits);

// -- TKL power allocation ------------------------------------------------------

/// Optimal per-dimension power scaling for the truncated KL encoder.
struct TklAllocation {
  RVector alpha;       ///< power scaling per retained dimension
  RVector rho;         ///< channel energy along each right-singular direction
  RVector lambda_bar;  ///< retained eigenvalues of X C_h X^H
  double gamma_star = 0.0;
  bool informative = true;  ///< false when every rho_i * lambda_bar_i is zero

  /// Transmit power actually used, Sum alpha_i (lambda_bar_i + 1).
  double used_power() const;
  /// Trace of the resulting estimate covariance, Sum rho a lb / (a (lb + 1) + 1).
  double objective() const;
};

/// Objective Sum_i rho_i alpha_i lb_i / (alpha_i (lb_i + 1) + 1).
double tkl_objective(const RVector& rho, const RVector& lambda_bar, const RVector& alpha);

/// Maximize tkl_objective subject to Sum alpha_i (lb_i + 1) <= uplink_power.
///
/// alpha_i = [sqrt(rho_i lb_i / (gamma (lb_i + 1))) - 1]_+ / (1 + lb_i), with
/// gamma such that Sum [sqrt(...) - 1]_+ = uplink_power, found exactly by
/// scanning active-set sizes (sqrt(gamma) = Sum_{i<=m} sqrt(t_i) / (P + m)).
TklAllocation tkl_waterfill(const RVector& rho, const RVector& lambda_bar, double uplink_power);

// -- linear Gaussian posterior ------------------------------------------------

/// Posterior of c ~ CN(0, I_r) from obs = H c + n, n ~ CN(0, R), mapped back
/// to a prior with independent variances `prior_variances` via x = D^{1/2} c.
///
/// All matrices are in information form so that extreme SNRs keep the
/// error covariance accurate:
///   J = H^H R^{-1} H,  Cov(x | obs) = D^{1/2} (I + J)^{-1} D^{1/2}.
struct LinearPosterior {
  CMatrix estimate_cov;  ///< Cov(E[x | obs]) = D^{1/2} J (I + J)^{-1} D^{1/2}
  CMatrix error_cov;     ///< D^{1/2} (I + J)^{-1} D^{1/2}
  CMatrix gain;          ///< E[x | obs] = gain * obs
};

LinearPosterior gaussian_posterior(const RVector& prior_variances, const CMatrix& h_eff,
                                   const CMatrix& noise_cov);

}  // namespace csifb
