#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "csifb/numerics.hpp"

namespace csifb {

/// Comb of `count` subcarriers out of `subcarriers`, one centred in each band.
/// 32 subcarriers, 8 pilots -> {2, 6, ..., 30}.
std::vector<int> comb_pilot_subcarriers(int subcarriers, int count);

struct SystemConfig {
  int antennas = 32;                 ///< M
  int subcarriers = 32;              ///< N
  int users = 6;                     ///< K
  double subcarrier_spacing_hz = 30e3;
  double max_delay_s = 7e-6;
  int coherence_symbols = 25;        ///< T
  int pilot_symbols = 8;             ///< T_p
  std::vector<int> pilot_subcarriers = comb_pilot_subcarriers(32, 8);
  double snr_dl = 1.0;               ///< linear
  std::optional<double> kappa_override;

  /// Multiuser efficiency; 1 - K/M (zero-forcing detector) unless overridden.
  double kappa() const;
  double snr_ul() const { return snr_dl / users; }
  int pilot_count() const { return static_cast<int>(pilot_subcarriers.size()); }
  int training_dim() const { return pilot_symbols * pilot_count(); }  ///< beta_tr
  int channel_dim() const { return antennas * subcarriers; }          ///< MN

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct PathParams {
  double angle_rad = 0.0;
  double delay_s = 0.0;
  double power = 0.0;
};

/// Multipath parameters of one user.
struct ChannelGeometry {
  std::vector<PathParams> paths;

  int path_count() const { return static_cast<int>(paths.size()); }
  double total_power() const;
};

/// Angles ~ U[-60, 60] deg, delays ~ U[0, tau_max], powers ~ U[0.4, 0.8]
/// normalized to sum 1. Throws ConfigError if path_count < 1.
ChannelGeometry sample_geometry(Rng& rng, int path_count, const SystemConfig& cfg);

/// a_m = exp(j pi (m-1) sin theta), m = 1..M.
CVector steering_vector(double theta_rad, int antennas);
/// b_n = exp(-j 2 pi (n-1) delta_f tau), n = 1..N.
CVector delay_vector(double tau_s, int subcarriers, double spacing_hz);

/// Second-order statistics of h in C^{MN}, h[n*M + m] = channel of antenna m
/// on subcarrier n.
///
/// Only the numeric range is stored: C = U diag(lambda) U^H with U an MN x r
/// orthonormal basis. Every covariance that derives from C (estimate, error)
/// lives in range(C) and is kept as an r x r core in this basis.
class ChannelCovariance {
 public:
  ChannelCovariance(int antennas, int subcarriers, RVector eigenvalues, CMatrix basis);

  /// Eigendecomposition of an explicit MN x MN matrix.
  static ChannelCovariance from_dense(const CMatrix& c, int antennas, int subcarriers);

  int antennas() const { return antennas_; }
  int subcarriers() const { return subcarriers_; }
  Index dim() const { return basis_.rows(); }
  Index rank() const { return eigenvalues_.size(); }

  /// Retained eigenvalues, descending, all above the rank threshold.
  const RVector& eigenvalues() const { return eigenvalues_; }
  /// MN x r orthonormal eigenvectors.
  const CMatrix& basis() const { return basis_; }
  /// All MN eigenvalues (retained ones followed by zeros).
  RVector full_spectrum() const;
  double trace() const { return eigenvalues_.sum(); }

  CMatrix dense() const;
  /// Map an r x r core to the full MN x MN matrix U core U^H.
  CMatrix expand(const CMatrix& core) const;
  /// M x M diagonal block of U core U^H at subcarrier n.
  CMatrix block(const CMatrix& core, int subcarrier) const;
  /// M x M diagonal block of C itself.
  CMatrix block(int subcarrier) const;
  /// Rows of U for subcarrier n (M x r).
  auto basis_rows(int subcarrier) const {
    return basis_.middleRows(static_cast<Index>(subcarrier) * antennas_, antennas_);
  }
  /// diag(lambda) as a dense r x r core.
  CMatrix core() const { return CMatrix(eigenvalues_.cast<Complex>().asDiagonal()); }

 private:
  int antennas_;
  int subcarriers_;
  RVector eigenvalues_;
  CMatrix basis_;
};

using CovariancePtr = std::shared_ptr<const ChannelCovariance>;

/// C = sum_l gamma_l (b_l b_l^H) kron (a_l a_l^H), computed through a thin QR
/// of the MN x L path matrix so only an L x L eigenproblem is solved.
ChannelCovariance build_covariance(const ChannelGeometry& geo, const SystemConfig& cfg);

/// h = vec(sum_l g_l a_l b_l^T), g_l ~ CN(0, gamma_l), antenna index fastest.
CVector sample_channel(const ChannelGeometry& geo, const SystemConfig& cfg, Rng& rng);

/// Block-comb pilot matrix X (beta_tr x MN).
///
/// Row block l (T_p rows) is nonzero only in the M columns of subcarrier n_l.
class PilotMatrix {
 public:
  PilotMatrix() = default;
  PilotMatrix(int antennas, int subcarriers, std::vector<int> probed, std::vector<CMatrix> blocks);

  /// X = sqrt(snr) I_{MN}: every antenna and subcarrier observed directly.
  static PilotMatrix direct_observation(int antennas, int subcarriers, double snr);

  int antennas() const { return antennas_; }
  int subcarriers() const { return subcarriers_; }
  Index rows() const;
  Index cols() const { return static_cast<Index>(antennas_) * subcarriers_; }
  const std::vector<int>& probed_subcarriers() const { return probed_; }
  const std::vector<CMatrix>& blocks() const { return blocks_; }

  CMatrix dense() const;
  CVector apply(const CVector& h) const;
  /// X * basis for an MN x r basis, exploiting the block sparsity.
  CMatrix project(const CMatrix& basis) const;
  /// Same layout with every block multiplied by `factor`.
  PilotMatrix scaled(double factor) const;

 private:
  int antennas_ = 0;
  int subcarriers_ = 0;
  std::vector<int> probed_;
  std::vector<CMatrix> blocks_;
};

/// Entries of each block i.i.d. CN(0, cfg.snr_dl / M). Throws ConfigError on
/// an invalid pilot layout.
PilotMatrix build_pilot_matrix(const SystemConfig& cfg, Rng& rng);

/// y = X h + n with n ~ CN(0, noise_variance I). noise_variance = 0 gives X h.
CVector observe_pilots(const PilotMatrix& x, const CVector& h, Rng& rng, double noise_variance = 1.0);

}  // namespace csifb
