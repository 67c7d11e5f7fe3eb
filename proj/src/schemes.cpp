#include "csifb/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csifb {

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::dr: return "dr";
    case SchemeId::ecsq: return "ecsq";
    case SchemeId::ljscc: return "ljscc";
    case SchemeId::tkl: return "tkl";
    case SchemeId::perfect: return "perfect";
  }
  return "unknown";
}

SchemeId parse_scheme(const std::string& name) {
  if (name == "dr") return SchemeId::dr;
  if (name == "ecsq") return SchemeId::ecsq;
  if (name == "ljscc") return SchemeId::ljscc;
  if (name == "tkl") return SchemeId::tkl;
  if (name == "perfect") return SchemeId::perfect;
  throw ConfigError("unknown scheme '" + name + "' (expected dr, ecsq, ljscc, tkl)");
}

FeedbackBudget FeedbackBudget::from_config(const SystemConfig& cfg, int beta_fb) {
  if (beta_fb < 1) throw ConfigError("beta_fb must be >= 1");
  FeedbackBudget b;
  b.beta_fb = beta_fb;
  b.snr_ul = cfg.snr_ul();
  b.kappa = cfg.kappa();
  b.antennas = cfg.antennas;
  return b;
}

double FeedbackBudget::uplink_power() const { return beta_fb * kappa * antennas * snr_ul; }

double FeedbackBudget::rate_bits() const {
  return beta_fb * std::log2(1.0 + kappa * antennas * snr_ul);
}

ProbedChannel::ProbedChannel(CovariancePtr c, const PilotMatrix& x) : cov(std::move(c)) {
  if (!cov) throw ConfigError("ProbedChannel: null covariance");
  const RVector sd = cov->eigenvalues().cwiseSqrt();
  sensing = x.project(cov->basis()) * sd.asDiagonal();
}

namespace {

double real_trace(const CMatrix& m) { return m.trace().real(); }

}  // namespace

CVector UserMmse::estimate(const ProbedChannel& ch, const CVector& y) const {
  return ch.from_core(gain_core * y);
}

UserMmse user_mmse(const ProbedChannel& ch) {
  const Index beta = ch.training_dim();
  LinearPosterior post =
      gaussian_posterior(ch.cov->eigenvalues(), ch.sensing, CMatrix::Identity(beta, beta));
  UserMmse out;
  out.estimate_core = std::move(post.estimate_cov);
  out.error_core = std::move(post.error_cov);
  out.gain_core = std::move(post.gain);
  out.d_mmse = std::max(real_trace(out.error_core), 0.0);
  return out;
}

DrPoint dr_distortion(const RVector& cu_spectrum, double d_mmse, double rate_bits) {
  DrPoint p;
  if (cu_spectrum.size() == 0 || !(cu_spectrum.maxCoeff() > 0.0)) {
    p.distortion = d_mmse;
    p.log2_gamma = -std::numeric_limits<double>::infinity();
    return p;
  }
  p.log2_gamma = reverse_waterfill_log2(cu_spectrum, rate_bits);
  p.gamma = std::exp2(p.log2_gamma);
  p.distortion = d_mmse + waterfill_distortion(cu_spectrum, p.gamma);
  return p;
}

double dr_rate(const RVector& cu_spectrum, double d_mmse, double d_target) {
  const double total = cu_spectrum.cwiseMax(0.0).sum();
  if (!(d_target > d_mmse)) throw ConfigError("dr_rate: target distortion must exceed D_mmse");
  if (d_target > d_mmse + total * (1.0 + 1e-12))
    throw ConfigError("dr_rate: target distortion exceeds tr(C_h)");
  const double gamma =
      waterfill_threshold_for_distortion(cu_spectrum, std::min(d_target - d_mmse, total));
  return waterfill_rate(cu_spectrum, gamma);
}

double SchemeOutput::nmse() const {
  return mse / (static_cast<double>(cov->antennas()) * cov->subcarriers());
}

SchemeOutput perfect_output(const CovariancePtr& cov) {
  SchemeOutput out;
  out.scheme = SchemeId::perfect;
  out.cov = cov;
  out.hat_core = cov->core();
  out.err_core = CMatrix::Zero(cov->rank(), cov->rank());
  out.mse = 0.0;
  return out;
}

TestChannelCodec::TestChannelCodec(const ProbedChannel& ch, SchemeId scheme,
                                   const FeedbackBudget& budget)
    : ch_(ch), scheme_(scheme), mmse_(user_mmse(ch)), rate_(budget.rate_bits()) {
  if (scheme != SchemeId::dr && scheme != SchemeId::ecsq)
    throw ConfigError("TestChannelCodec: scheme must be dr or ecsq");
  Spectrum s = psd_eig(mmse_.estimate_core);
  const Index keep = numeric_rank(s.values);
  for (Index i = keep; i < s.size(); ++i) s.values(i) = 0.0;
  mu_ = std::move(s.values);
  f_ = std::move(s.basis);
  if (keep == 0) {
    gamma_ = 0.0;
  } else if (scheme == SchemeId::dr) {
    gamma_ = reverse_waterfill(mu_, rate_);
  } else {
    gamma_ = ecsq_threshold(mu_, rate_);
  }
}

Index TestChannelCodec::active_count() const {
  Index n = 0;
  for (Index i = 0; i < mu_.size(); ++i)
    if (mu_(i) > gamma_ && mu_(i) > 0.0) ++n;
  return n;
}

SchemeOutput TestChannelCodec::output() const {
  const Index r = mu_.size();
  RVector kept(r), quant(r);
  for (Index i = 0; i < r; ++i) {
    kept(i) = std::max(mu_(i) - gamma_, 0.0);
    quant(i) = std::min(gamma_, mu_(i));
  }
  SchemeOutput out;
  out.scheme = scheme_;
  out.cov = ch_.cov;
  out.hat_core = f_ * kept.asDiagonal() * f_.adjoint();
  // error = (C_h - C_u) + C_q, a sum of PSD terms
  out.err_core = mmse_.error_core + f_ * quant.asDiagonal() * f_.adjoint();
  out.mse = mmse_.d_mmse + quant.sum();
  if (active_count() == 0) out.note = "nothing encoded";
  return out;
}

CVector TestChannelCodec::roundtrip(const CVector& y, Rng& rng) const {
  const CVector u_f = f_.adjoint() * (mmse_.gain_core * y);
  const CVector w = rng.complex_normal_vector(mu_.size());
  CVector hat_f = CVector::Zero(mu_.size());
  for (Index i = 0; i < mu_.size(); ++i) {
    if (!(mu_(i) > gamma_)) continue;
    const double kept = mu_(i) - gamma_;
    hat_f(i) = (kept / mu_(i)) * u_f(i) + std::sqrt(kept * gamma_ / mu_(i)) * w(i);
  }
  return ch_.from_core(f_ * hat_f);
}

SchemeOutput dr_output(const ProbedChannel& ch, const FeedbackBudget& budget) {
  return TestChannelCodec(ch, SchemeId::dr, budget).output();
}

SchemeOutput ecsq_output(const ProbedChannel& ch, const FeedbackBudget& budget) {
  return TestChannelCodec(ch, SchemeId::ecsq, budget).output();
}

LjsccCodec::LjsccCodec(const ProbedChannel& ch, const FeedbackBudget& budget, CMatrix spreading)
    : ch_(ch), budget_(budget), w_(std::move(spreading)) {
  if (w_.rows() != budget.beta_fb || w_.cols() != ch.training_dim())
    throw ConfigError("LjsccCodec: spreading matrix must be beta_fb x beta_tr");
  const CMatrix wa = w_ * ch.sensing;
  // tr(W (X C_h X^H + I) W^H) = |W A|_F^2 + |W|_F^2
  const double energy = wa.squaredNorm() + w_.squaredNorm();
  nu_ = energy > 0.0 ? budget.uplink_power() / energy : 0.0;
  const Index b = w_.rows();
  const CMatrix noise = nu_ * (w_ * w_.adjoint()) + CMatrix::Identity(b, b);
  post_ = gaussian_posterior(ch.cov->eigenvalues(), std::sqrt(nu_) * wa, noise);
}

SchemeOutput LjsccCodec::output() const {
  SchemeOutput out;
  out.scheme = SchemeId::ljscc;
  out.cov = ch_.cov;
  out.hat_core = post_.estimate_cov;
  out.err_core = post_.error_cov;
  out.mse = std::max(real_trace(post_.error_cov), 0.0);
  return out;
}

CVector LjsccCodec::decode(const CVector& received) const {
  return ch_.from_core(post_.gain * received);
}

CVector LjsccCodec::roundtrip(const CVector& y, Rng& rng) const {
  const CVector received = encode(y) + rng.complex_normal_vector(w_.rows());
  return decode(received);
}

LjsccCodec ljscc_build(const ProbedChannel& ch, const FeedbackBudget& budget, Rng& rng) {
  if (budget.beta_fb < 1) throw ConfigError("ljscc_build: beta_fb must be >= 1");
  CMatrix w = rng.complex_normal_matrix(budget.beta_fb, ch.training_dim());
  return LjsccCodec(ch, budget, std::move(w));
}

TklCodec::TklCodec(const ProbedChannel& ch, const FeedbackBudget& budget)
    : ch_(ch), budget_(budget) {
  const Index beta_tr = ch.training_dim();
  const Index beta_fb = budget.beta_fb;
  if (beta_fb > beta_tr) throw ConfigError("TKL needs beta_fb <= beta_tr");
  const Index r = ch.rank();

  RVector lambda_bar = RVector::Zero(beta_fb);
  RVector rho = RVector::Zero(beta_fb);
  u_ = CMatrix::Zero(beta_tr, beta_fb);
  const Index k = std::min({beta_tr, r, beta_fb});
  if (k > 0) {
    // sensing = X U_r Lambda^{1/2} = X C_h^{1/2} U_r with the Hermitian root,
    // so its right-singular vectors are the core coordinates of Q
    Eigen::JacobiSVD<CMatrix> svd(ch.sensing, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sigma = svd.singularValues();
    u_.leftCols(k) = svd.matrixU().leftCols(k);
    v_ = svd.matrixV().leftCols(k);
    const RVector& lam = ch.cov->eigenvalues();
    for (Index i = 0; i < k; ++i) {
      lambda_bar(i) = sigma(i) * sigma(i);
      rho(i) = (v_.col(i).adjoint() * lam.asDiagonal() * v_.col(i))(0).real();
    }
  } else {
    v_ = CMatrix::Zero(r, 0);
  }
  alloc_ = tkl_waterfill(rho, lambda_bar, budget.uplink_power());

  const RVector sqrt_alpha = alloc_.alpha.cwiseSqrt();
  const CMatrix h_eff = sqrt_alpha.asDiagonal() * (u_.adjoint() * ch.sensing);
  const CMatrix noise = CMatrix((alloc_.alpha.array() + 1.0).matrix().cast<Complex>().asDiagonal());
  post_ = gaussian_posterior(ch.cov->eigenvalues(), h_eff, noise);
}

CVector TklCodec::encode(const CVector& y) const {
  return alloc_.alpha.cwiseSqrt().cast<Complex>().asDiagonal() * (u_.adjoint() * y);
}

CVector TklCodec::decode(const CVector& received) const {
  return ch_.from_core(post_.gain * received);
}

CVector TklCodec::roundtrip(const CVector& y, Rng& rng) const {
  const CVector received = encode(y) + rng.complex_normal_vector(u_.cols());
  return decode(received);
}

SchemeOutput TklCodec::output() const {
  SchemeOutput out;
  out.scheme = SchemeId::tkl;
  out.cov = ch_.cov;
  out.hat_core = post_.estimate_cov;
  out.err_core = post_.error_cov;
  out.mse = std::max(real_trace(post_.error_cov), 0.0);
  if (!alloc_.informative) out.note = "no informative dimensions";
  return out;
}

JointSampler::JointSampler(const SchemeOutput& out)
    : cov_(out.cov), hat_f_(psd_factor(out.hat_core)), err_f_(psd_factor(out.err_core)) {}

std::pair<CVector, CVector> JointSampler::draw_core(Rng& rng) const {
  const Index r = cov_->rank();
  CVector hat = CVector::Zero(r);
  CVector err = CVector::Zero(r);
  if (hat_f_.cols() > 0) hat = hat_f_ * rng.complex_normal_vector(hat_f_.cols());
  if (err_f_.cols() > 0) err = err_f_ * rng.complex_normal_vector(err_f_.cols());
  return {hat + err, hat};
}

std::pair<CVector, CVector> JointSampler::draw(Rng& rng) const {
  auto [h, hat] = draw_core(rng);
  return {cov_->basis() * h, cov_->basis() * hat};
}

}  // namespace csifb
