#pragma once

#include <optional>
#include <string>
#include <utility>

#include "csifb/model.hpp"

namespace csifb {

enum class SchemeId { dr, ecsq, ljscc, tkl, perfect };

std::string scheme_name(SchemeId id);
/// Parses "dr", "ecsq", "ljscc", "tkl", "perfect". Throws ConfigError otherwise.
SchemeId parse_scheme(const std::string& name);

/// Uplink resources available to one user for feeding back its pilot observation.
struct FeedbackBudget {
  int beta_fb = 1;
  double snr_ul = 1.0;
  double kappa = 1.0;
  int antennas = 32;

  static FeedbackBudget from_config(const SystemConfig& cfg, int beta_fb);

  /// beta_fb * kappa * M * snr_ul: total power of the analog (JSCC) feedback.
  double uplink_power() const;
  /// beta_fb * log2(1 + kappa * M * snr_ul): bits available to digital (SSCC) feedback.
  double rate_bits() const;
};

/// C_h paired with the pilot matrix that probes it.
///
/// `sensing` is X U Lambda^{1/2} (beta_tr x r): with h = U Lambda^{1/2} c and
/// c ~ CN(0, I_r), the pilot observation is y = sensing * c + n.
struct ProbedChannel {
  CovariancePtr cov;
  CMatrix sensing;

  ProbedChannel(CovariancePtr cov, const PilotMatrix& x);
  Index rank() const { return cov->rank(); }
  Index training_dim() const { return sensing.rows(); }
  /// Core coordinates x = U^H h of a full channel vector.
  CVector to_core(const CVector& h) const { return cov->basis().adjoint() * h; }
  CVector from_core(const CVector& core) const { return cov->basis() * core; }
};

/// User-side linear MMSE estimate of h from its pilot observation.
struct UserMmse {
  CMatrix estimate_core;  ///< C_u in the eigenbasis of C_h
  CMatrix error_core;     ///< C_h - C_u
  CMatrix gain_core;      ///< u_core = gain_core * y
  double d_mmse = 0.0;

  /// u = C_h X^H (X C_h X^H + I)^{-1} y, as a full MN vector.
  CVector estimate(const ProbedChannel& ch, const CVector& y) const;
};

UserMmse user_mmse(const ProbedChannel& ch);

/// Remote distortion D_mmse + sum_i min(gamma, lambda_i^u) with gamma from
/// reverse water-filling on the spectrum of C_u.
struct DrPoint {
  double distortion = 0.0;
  double gamma = 0.0;
  double log2_gamma = 0.0;
};
DrPoint dr_distortion(const RVector& cu_spectrum, double d_mmse, double rate_bits);

/// Inverse of dr_distortion. Throws ConfigError unless d_target lies in (d_mmse, d_mmse + sum].
double dr_rate(const RVector& cu_spectrum, double d_mmse, double d_target);

/// Estimate and error covariances of a scheme, as cores in the eigenbasis of C_h.
struct SchemeOutput {
  SchemeId scheme = SchemeId::perfect;
  CovariancePtr cov;
  CMatrix hat_core;
  CMatrix err_core;
  double mse = 0.0;
  std::string note;  ///< empty unless something noteworthy happened (e.g. nothing encoded)

  CMatrix hat_dense() const { return cov->expand(hat_core); }
  CMatrix err_dense() const { return cov->expand(err_core); }
  /// mse / (M N).
  double nmse() const;
};

SchemeOutput perfect_output(const CovariancePtr& cov);

/// Shared test-channel construction of DR and ECSQ.
///
/// In the eigenbasis F of C_u with eigenvalues mu: hhat = C_hhat C_u^+ u + q,
/// C_hhat = F diag((mu - gamma)_+) F^H and Cov(q) = C_hhat - C_hhat C_u^+ C_hhat,
/// which is the conditional covariance that makes Cov(hhat) = C_hhat.
class TestChannelCodec {
 public:
  TestChannelCodec(const ProbedChannel& ch, SchemeId scheme, const FeedbackBudget& budget);

  SchemeId scheme() const { return scheme_; }
  const UserMmse& mmse() const { return mmse_; }
  const RVector& cu_spectrum() const { return mu_; }
  double gamma() const { return gamma_; }
  double rate_bits() const { return rate_; }
  /// Number of C_u eigen-coefficients strictly above the threshold.
  Index active_count() const;

  SchemeOutput output() const;
  /// Draw hhat (full MN vector) for one pilot observation.
  CVector roundtrip(const CVector& y, Rng& rng) const;

 private:
  ProbedChannel ch_;
  SchemeId scheme_;
  UserMmse mmse_;
  RVector mu_;
  CMatrix f_;
  double gamma_ = 0.0;
  double rate_ = 0.0;
};

SchemeOutput dr_output(const ProbedChannel& ch, const FeedbackBudget& budget);
SchemeOutput ecsq_output(const ProbedChannel& ch, const FeedbackBudget& budget);

/// Linear JSCC with a random spreading matrix W (beta_fb x beta_tr, CN(0,1)).
class LjsccCodec {
 public:
  /// W supplied by the caller so it can stay fixed across an SNR sweep.
  LjsccCodec(const ProbedChannel& ch, const FeedbackBudget& budget, CMatrix spreading);

  const CMatrix& spreading() const { return w_; }
  double nu() const { return nu_; }
  /// z = sqrt(nu) W y, the transmitted feedback symbols.
  CVector encode(const CVector& y) const { return std::sqrt(nu_) * (w_ * y); }

  SchemeOutput output() const;
  CVector roundtrip(const CVector& y, Rng& rng) const;
  /// Decode a received feedback vector ytilde = z + n_ul.
  CVector decode(const CVector& received) const;

 private:
  ProbedChannel ch_;
  FeedbackBudget budget_;
  CMatrix w_;
  double nu_ = 0.0;
  LinearPosterior post_;
};

/// Draws W and builds the codec. W is the first thing taken from `rng`.
LjsccCodec ljscc_build(const ProbedChannel& ch, const FeedbackBudget& budget, Rng& rng);

/// Truncated Karhunen-Loeve feedback.
///
/// With the SVD X C_h^{1/2} = U Sigma Q^H, the user sends the first beta_fb
/// coordinates of U^H y scaled by sqrt(alpha), alpha from tkl_waterfill.
class TklCodec {
 public:
  /// Throws ConfigError when beta_fb > beta_tr.
  TklCodec(const ProbedChannel& ch, const FeedbackBudget& budget);

  const TklAllocation& allocation() const { return alloc_; }
  /// First beta_fb left-singular vectors (beta_tr x beta_fb, zero-padded).
  const CMatrix& left_vectors() const { return u_; }
  /// Right-singular vectors in C_h core coordinates (r x min(beta_fb, r)).
  const CMatrix& right_vectors_core() const { return v_; }

  /// zhat = diag(sqrt(alpha)) S U^H y.
  CVector encode(const CVector& y) const;
  CVector decode(const CVector& received) const;
  CVector roundtrip(const CVector& y, Rng& rng) const;
  SchemeOutput output() const;

 private:
  ProbedChannel ch_;
  FeedbackBudget budget_;
  CMatrix u_;
  CMatrix v_;
  TklAllocation alloc_;
  LinearPosterior post_;
};

/// Draws (h, hhat) with hhat ~ CN(0, C_hat) and h - hhat ~ CN(0, C_err) independent.
class JointSampler {
 public:
  explicit JointSampler(const SchemeOutput& out);
  /// Returns (h, hhat) as full MN vectors.
  std::pair<CVector, CVector> draw(Rng& rng) const;
  /// Same draw in core coordinates.
  std::pair<CVector, CVector> draw_core(Rng& rng) const;
  const CMatrix& hat_factor() const { return hat_f_; }
  const CMatrix& err_factor() const { return err_f_; }

 private:
  CovariancePtr cov_;
  CMatrix hat_f_;
  CMatrix err_f_;
};

}  // namespace csifb
