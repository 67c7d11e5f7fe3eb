#include "csifb/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csifb {

CMatrix diagonal_block(const CMatrix& full, int antennas, int subcarrier) {
  const Index off = static_cast<Index>(subcarrier) * antennas;
  if (off + antennas > full.rows() || full.rows() != full.cols())
    throw ConfigError("diagonal_block: block outside the matrix");
  return full.block(off, off, antennas, antennas);
}

std::vector<SubcarrierStats> extract_subcarrier_blocks(const std::vector<CMatrix>& hat_full,
                                                       const std::vector<CMatrix>& err_full,
                                                       int antennas, int subcarriers) {
  if (hat_full.size() != err_full.size())
    throw ConfigError("extract_subcarrier_blocks: estimate/error count mismatch");
  const Index dim = static_cast<Index>(antennas) * subcarriers;
  for (std::size_t k = 0; k < hat_full.size(); ++k)
    if (hat_full[k].rows() != dim || hat_full[k].cols() != dim || err_full[k].rows() != dim ||
        err_full[k].cols() != dim)
      throw ConfigError("extract_subcarrier_blocks: covariance is not MN x MN");
  std::vector<SubcarrierStats> out(static_cast<std::size_t>(subcarriers));
  for (int n = 0; n < subcarriers; ++n) {
    auto& s = out[static_cast<std::size_t>(n)];
    for (std::size_t k = 0; k < hat_full.size(); ++k) {
      s.hat.push_back(diagonal_block(hat_full[k], antennas, n));
      s.err.push_back(diagonal_block(err_full[k], antennas, n));
      s.full.push_back(s.hat.back() + s.err.back());
    }
  }
  return out;
}

std::vector<SubcarrierStats> extract_subcarrier_blocks(const std::vector<SchemeOutput>& users) {
  if (users.empty()) return {};
  const int n_sub = users.front().cov->subcarriers();
  std::vector<SubcarrierStats> out(static_cast<std::size_t>(n_sub));
  for (const auto& u : users) {
    if (u.cov->subcarriers() != n_sub || u.cov->antennas() != users.front().cov->antennas())
      throw ConfigError("extract_subcarrier_blocks: users disagree on M or N");
    const CMatrix hat_f = psd_factor(u.hat_core);
    const CMatrix err_f = psd_factor(u.err_core);
    const CMatrix full_core = u.hat_core + u.err_core;
    for (int n = 0; n < n_sub; ++n) {
      auto& s = out[static_cast<std::size_t>(n)];
      const CMatrix rows = u.cov->basis_rows(n);
      s.hat.push_back(rows * u.hat_core * rows.adjoint());
      s.err.push_back(rows * u.err_core * rows.adjoint());
      s.full.push_back(rows * full_core * rows.adjoint());
      s.hat_factor.push_back(rows * hat_f);
      s.err_factor.push_back(rows * err_f);
    }
  }
  return out;
}

namespace {

double real_trace(const CMatrix& m) { return m.trace().real(); }

double sum_hat_trace(const SubcarrierStats& s) {
  double t = 0.0;
  for (const auto& c : s.hat) t += real_trace(c);
  return t;
}

CVector draw(const CMatrix& factor, Rng& rng) {
  if (factor.cols() == 0) return CVector::Zero(factor.rows());
  return factor * rng.complex_normal_vector(factor.cols());
}

struct Gram {
  bool ok = false;
  RVector values;
  CMatrix vectors;
};

// eigendecomposition of H^H H with the conditioning test
Gram gram_eig(const CMatrix& h) {
  Gram g;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.adjoint() * h);
  if (es.info() != Eigen::Success) return g;
  g.values = es.eigenvalues();
  g.vectors = es.eigenvectors();
  const double lo = g.values.minCoeff();
  const double hi = g.values.maxCoeff();
  g.ok = lo > 0.0 && hi / lo <= kZfMaxCondition;
  return g;
}

std::vector<int> active_users(const SubcarrierStats& s) {
  std::vector<int> act;
  for (int k = 0; k < s.users(); ++k)
    if (real_trace(s.hat[static_cast<std::size_t>(k)]) > 0.0) act.push_back(k);
  return act;
}

}  // namespace

double mrt_power_scale(const SubcarrierStats& s, double snr_dl) {
  const double t = sum_hat_trace(s);
  return t > 0.0 ? snr_dl / t : 0.0;
}

RVector uatf_mrt(const SubcarrierStats& s, double snr_dl) {
  const int k_users = s.users();
  RVector rates = RVector::Zero(k_users);
  const double eta = mrt_power_scale(s, snr_dl);
  if (eta <= 0.0) return rates;
  CMatrix sum_hat = CMatrix::Zero(s.antennas(), s.antennas());
  for (const auto& c : s.hat) sum_hat += c;
  for (int k = 0; k < k_users; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double signal = real_trace(s.hat[kk]);
    if (signal <= 0.0) continue;
    // tr(A B) for Hermitian A, B without forming the product
    const double interference = (sum_hat.cwiseProduct(s.full[kk].transpose())).sum().real();
    rates(k) = std::log2(1.0 + signal * signal / (interference + 1.0 / eta));
  }
  return rates;
}

double ZfMoments::rejection_fraction() const {
  const std::size_t total = n_samples + n_rejected;
  return total == 0 ? 0.0 : static_cast<double>(n_rejected) / static_cast<double>(total);
}

ZfMoments zf_moments(const SubcarrierStats& s, std::size_t n_samples, Rng& rng, bool strict) {
  if (!s.can_sample()) throw ConfigError("zf_moments: sampling factors missing");
  if (s.users() > s.antennas()) throw ConfigError("zf_moments: more users than antennas");
  ZfMoments m;
  m.active = active_users(s);
  const Index mant = s.antennas();
  m.mid_matrix = CMatrix::Zero(mant, mant);
  const auto ka = static_cast<Index>(m.active.size());
  if (ka == 0 || n_samples == 0) return m;

  double sum = 0.0, sum_sq = 0.0;
  CMatrix h(mant, ka);
  for (std::size_t t = 0; t < n_samples; ++t) {
    for (Index j = 0; j < ka; ++j) h.col(j) = draw(s.hat_factor[static_cast<std::size_t>(m.active[static_cast<std::size_t>(j)])], rng);
    const Gram g = gram_eig(h);
    if (!g.ok) {
      ++m.n_rejected;
      continue;
    }
    const double tr_inv = g.values.cwiseInverse().sum();
    sum += tr_inv;
    sum_sq += tr_inv * tr_inv;
    // H (H^H H)^{-2} H^H = B B^H with B = H V diag(1/lambda)
    const CMatrix b = h * g.vectors * g.values.cwiseInverse().asDiagonal();
    m.mid_matrix.noalias() += b * b.adjoint();
    ++m.n_samples;
  }
  if (m.n_samples > 0) {
    const double n = static_cast<double>(m.n_samples);
    m.inv_trace = sum / n;
    m.mid_matrix /= n;
    const double var = n > 1 ? std::max(sum_sq / n - m.inv_trace * m.inv_trace, 0.0) * n / (n - 1) : 0.0;
    m.inv_trace_se = std::sqrt(var / n);
  }
  if (strict && m.rejection_fraction() > kZfMaxRejection) {
    std::ostringstream msg;
    msg << "zero-forcing moments: " << m.n_rejected << " of " << (m.n_samples + m.n_rejected)
        << " draws rejected (cond > 1e12); estimate covariances too degenerate";
    throw ZfDegenerateError(msg.str());
  }
  return m;
}

RVector uatf_zf(const SubcarrierStats& s, const ZfMoments& m, double snr_dl) {
  RVector rates = RVector::Zero(s.users());
  if (m.n_samples == 0 || !(m.inv_trace > 0.0) || snr_dl <= 0.0) return rates;
  const double eta = snr_dl / m.inv_trace;
  for (int k : m.active) {
    const auto kk = static_cast<std::size_t>(k);
    const double leak = (m.mid_matrix.cwiseProduct(s.err[kk].transpose())).sum().real();
    rates(k) = std::log2(1.0 + 1.0 / (std::max(leak, 0.0) + 1.0 / eta));
  }
  return rates;
}

RateEstimate rate_upper_bound(const SubcarrierStats& s, Precoder precoder, double snr_dl,
                              std::size_t n_samples, Rng& rng, const ZfMoments* zf) {
  if (!s.can_sample()) throw ConfigError("rate_upper_bound: sampling factors missing");
  const int k_users = s.users();
  RateEstimate out{RVector::Zero(k_users), RVector::Zero(k_users)};
  std::vector<int> act;
  double eta = 0.0;
  if (precoder == Precoder::mrt) {
    eta = mrt_power_scale(s, snr_dl);
    act = active_users(s);
  } else {
    if (zf == nullptr) throw ConfigError("rate_upper_bound: zero-forcing needs moments");
    if (zf->n_samples > 0 && zf->inv_trace > 0.0) eta = snr_dl / zf->inv_trace;
    act = zf->active;
  }
  if (eta <= 0.0 || act.empty() || n_samples == 0) return out;

  const Index mant = s.antennas();
  const auto ka = static_cast<Index>(act.size());
  RVector sum = RVector::Zero(k_users), sum_sq = RVector::Zero(k_users);
  std::size_t used = 0;
  CMatrix h(mant, k_users), hat(mant, ka);
  for (std::size_t t = 0; t < n_samples; ++t) {
    std::vector<CVector> hat_k(static_cast<std::size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      hat_k[kk] = draw(s.hat_factor[kk], rng);
      h.col(k) = hat_k[kk] + draw(s.err_factor[kk], rng);
    }
    for (Index j = 0; j < ka; ++j) hat.col(j) = hat_k[static_cast<std::size_t>(act[static_cast<std::size_t>(j)])];
    CMatrix v;
    if (precoder == Precoder::mrt) {
      v = std::sqrt(eta) * hat;
    } else {
      const Gram g = gram_eig(hat);
      if (!g.ok) continue;
      v = std::sqrt(eta) * hat * (g.vectors * g.values.cwiseInverse().asDiagonal() * g.vectors.adjoint());
    }
    const CMatrix gains = h.adjoint() * v;  // K x ka, entry (k, j) = h_k^H v_j
    for (int k = 0; k < k_users; ++k) {
      double signal = 0.0, interference = 0.0;
      for (Index j = 0; j < ka; ++j) {
        const double p = std::norm(gains(k, j));
        if (act[static_cast<std::size_t>(j)] == k)
          signal = p;
        else
          interference += p;
      }
      const double r = std::log2(1.0 + signal / (interference + 1.0));
      sum(k) += r;
      sum_sq(k) += r * r;
    }
    ++used;
  }
  if (used == 0) return out;
  const double n = static_cast<double>(used);
  out.mean = sum / n;
  for (int k = 0; k < k_users; ++k) {
    const double var = n > 1 ? std::max(sum_sq(k) / n - out.mean(k) * out.mean(k), 0.0) * n / (n - 1) : 0.0;
    out.std_error(k) = std::sqrt(var / n);
  }
  return out;
}

double average_sum_rate(const Eigen::MatrixXd& rates, const SystemConfig& cfg) {
  if (rates.cols() != cfg.subcarriers) throw ConfigError("average_sum_rate: need one column per subcarrier");
  std::vector<bool> pilot(static_cast<std::size_t>(cfg.subcarriers), false);
  for (int n : cfg.pilot_subcarriers) {
    if (n < 0 || n >= cfg.subcarriers) throw ConfigError("average_sum_rate: pilot index out of range");
    pilot[static_cast<std::size_t>(n)] = true;
  }
  const double data_fraction =
      static_cast<double>(cfg.coherence_symbols - cfg.pilot_symbols) / cfg.coherence_symbols;
  double total = 0.0;
  for (int n = 0; n < cfg.subcarriers; ++n) {
    const double s = rates.col(n).sum();
    total += pilot[static_cast<std::size_t>(n)] ? data_fraction * s : s;
  }
  return total / cfg.subcarriers;
}

}  // namespace csifb
