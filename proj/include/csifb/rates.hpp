#pragma once

#include <cstddef>
#include <vector>

#include "csifb/schemes.hpp"

namespace csifb {

/// Per-user M x M statistics on one subcarrier.
struct SubcarrierStats {
  std::vector<CMatrix> hat;   ///< C_hat_k[n]
  std::vector<CMatrix> full;  ///< C_h_k[n]
  std::vector<CMatrix> err;   ///< C_err_k[n]
  /// Optional factors with F F^H = C_hat_k[n] and C_err_k[n]; needed for sampling.
  std::vector<CMatrix> hat_factor;
  std::vector<CMatrix> err_factor;

  int users() const { return static_cast<int>(hat.size()); }
  Index antennas() const { return hat.empty() ? 0 : hat.front().rows(); }
  bool can_sample() const { return hat_factor.size() == hat.size() && err_factor.size() == hat.size(); }
};

/// M x M diagonal block n of a full MN x MN matrix.
CMatrix diagonal_block(const CMatrix& full, int antennas, int subcarrier);

/// Builds SubcarrierStats from full MN x MN estimate and error covariances
/// (one pair per user). Throws ConfigError on dimension mismatch.
std::vector<SubcarrierStats> extract_subcarrier_blocks(const std::vector<CMatrix>& hat_full,
                                                       const std::vector<CMatrix>& err_full,
                                                       int antennas, int subcarriers);

/// Same from scheme outputs, including sampling factors, without forming MN x MN matrices.
std::vector<SubcarrierStats> extract_subcarrier_blocks(const std::vector<SchemeOutput>& users);

/// eta = snr / sum_k tr(C_hat_k); 0 when every estimate is zero.
double mrt_power_scale(const SubcarrierStats& s, double snr_dl);

/// Closed-form UatF rate under MRT, bits per channel use, per user.
RVector uatf_mrt(const SubcarrierStats& s, double snr_dl);

/// Largest cond(H^H H) accepted when averaging zero-forcing moments.
inline constexpr double kZfMaxCondition = 1e12;
/// Maximum tolerated fraction of rejected draws.
inline constexpr double kZfMaxRejection = 0.01;

struct ZfMoments {
  double inv_trace = 0.0;       ///< tr E[(H^H H)^{-1}]
  double inv_trace_se = 0.0;    ///< Monte-Carlo standard error of inv_trace
  CMatrix mid_matrix;           ///< E[H (H^H H)^{-2} H^H], M x M
  std::size_t n_samples = 0;    ///< accepted draws
  std::size_t n_rejected = 0;
  std::vector<int> active;      ///< users with a nonzero estimate, in order

  double rejection_fraction() const;
};

/// Monte-Carlo moments over H = [hhat_k], hhat_k ~ CN(0, C_hat_k) for the
/// active users. Draws with cond(H^H H) > 1e12 are rejected. With `strict`
/// a rejection fraction above 1% throws ZfDegenerateError.
ZfMoments zf_moments(const SubcarrierStats& s, std::size_t n_samples, Rng& rng, bool strict = true);

/// UatF rate under ZF: log2(1 + 1 / (tr(mid C_err_k) + 1 / eta_tilde)),
/// eta_tilde = snr / inv_trace. Users without an estimate get rate 0.
RVector uatf_zf(const SubcarrierStats& s, const ZfMoments& m, double snr_dl);

enum class Precoder { mrt, zf };

struct RateEstimate {
  RVector mean;
  RVector std_error;
};

/// Monte-Carlo average of log2(1 + |h_k^H v_k|^2 / (sum_{j != k} |h_k^H v_j|^2 + 1))
/// with (h_k, hhat_k) drawn jointly and V normalized as in the UatF bounds.
/// ZF needs the moments for eta_tilde.
RateEstimate rate_upper_bound(const SubcarrierStats& s, Precoder precoder, double snr_dl,
                              std::size_t n_samples, Rng& rng, const ZfMoments* zf = nullptr);

/// R_avg = (1/N) sum_{n not pilot} sum_k R_k[n] + (T - T_p)/(N T) sum_{n pilot} sum_k R_k[n].
/// `rates` is K x N.
double average_sum_rate(const Eigen::MatrixXd& rates, const SystemConfig& cfg);

}  // namespace csifb
