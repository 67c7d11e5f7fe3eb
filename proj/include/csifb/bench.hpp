#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <string>
#include <vector>

#include "csifb/rates.hpp"
#include "csifb/records.hpp"

namespace csifb {

enum class ExperimentKind { nmse_sweep, rate_sweep, user_sweep, qse, table1 };

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::nmse_sweep;
  SystemConfig system;  ///< snr_dl and users are overwritten per grid point
  int paths = 6;        ///< L
  std::vector<SchemeId> schemes = {SchemeId::dr, SchemeId::ecsq, SchemeId::ljscc, SchemeId::tkl};
  std::vector<double> snr_db = {-10, 0, 10};
  std::vector<int> beta_fb = {3};
  std::vector<int> users = {6};  ///< only user-sweep iterates over this
  std::vector<Precoder> precoders = {Precoder::mrt, Precoder::zf};
  int n_geometries = 10;
  int n_realizations = 1000;  ///< samples of the rate upper bound per subcarrier
  int mc_samples = 10000;     ///< draws for the zero-forcing moments
  bool upper_bound = true;
  double ul_snr_db = 100.0;   ///< table1 only
  std::uint64_t master_seed = 1;
  int threads = 1;

  /// Throws ConfigError on empty grids or out-of-range values.
  void validate() const;
};

/// Seed purposes folded into derive_seed paths.
enum class SeedPurpose : std::uint64_t {
  geometry = 1,
  pilot = 2,
  spreading = 3,
  zf_moments = 4,
  upper_bound = 5,
};

/// K users' statistics plus the pilot matrix shared by them, for one geometry index.
///
/// Geometry of user k depends only on (seed, geometry index, k), so sweeps over
/// K reuse the same users. The pilot matrix is drawn at unit SNR and rescaled.
struct GeometryDraw {
  int index = 0;
  std::vector<ChannelGeometry> geometries;
  std::vector<CovariancePtr> covariances;
  PilotMatrix unit_pilot;  ///< entries CN(0, 1/M)
};

GeometryDraw draw_geometry(const ExperimentSpec& spec, const SystemConfig& cfg, int index,
                           int n_users, int paths);

/// One scheme for one user at one configuration. `w_seed` seeds the LJSCC
/// spreading matrix. Infeasible TKL (beta_fb > beta_tr) throws ConfigError.
SchemeOutput run_scheme(SchemeId scheme, const ProbedChannel& ch, const FeedbackBudget& budget,
                        std::uint64_t w_seed);

/// Linear NMSE averaged over users, indexed [grid point][scheme][geometry].
struct NmseTable {
  struct Point {
    double snr_db = 0.0;
    int beta_fb = 0;
    int users = 0;
  };
  std::vector<Point> grid;
  std::vector<SchemeId> schemes;
  std::vector<std::vector<std::vector<double>>> nmse;
  std::vector<std::vector<std::string>> notes;  ///< [grid][scheme]
};

/// NMSE for grid = snr_db x beta_fb (x users for a user sweep), K from
/// spec.system.users otherwise.
NmseTable evaluate_nmse(const ExperimentSpec& spec);

/// Per-geometry averaged sum rates at one grid point and scheme.
struct RateSample {
  double uatf_mrt = 0.0;
  double uatf_zf = 0.0;
  double ub_mrt = 0.0;
  double ub_zf = 0.0;
  double ub_mrt_se = 0.0;  ///< Monte-Carlo standard error
  double ub_zf_se = 0.0;
  double uatf_zf_se = 0.0;
  double zf_rejection = 0.0;  ///< worst rejection fraction over subcarriers
};

struct RateTable {
  std::vector<NmseTable::Point> grid;
  std::vector<SchemeId> schemes;  ///< requested schemes followed by "perfect"
  std::vector<std::vector<std::vector<RateSample>>> rates;  ///< [grid][scheme][geometry]
  std::vector<std::vector<std::string>> notes;
};

RateTable evaluate_rates(const ExperimentSpec& spec);

/// Sum rate of one geometry from per-user scheme outputs.
RateSample evaluate_geometry_rates(const std::vector<SchemeOutput>& users, const SystemConfig& cfg,
                                   const ExperimentSpec& spec, std::uint64_t seed);

std::vector<SweepRecord> run_nmse_sweep(const ExperimentSpec& spec);
std::vector<SweepRecord> run_rate_sweep(const ExperimentSpec& spec);
std::vector<SweepRecord> run_user_sweep(const ExperimentSpec& spec);
std::vector<SweepRecord> run_table1(const ExperimentSpec& spec);
/// NMSE sweep followed by one qse_slope row per (scheme, beta_fb).
std::vector<SweepRecord> run_qse(const ExperimentSpec& spec);

std::vector<SweepRecord> run_experiment(const ExperimentSpec& spec);

/// Negated least-squares slope of mse_dB against snr_dB (so mse ~ c / snr gives 1).
/// Throws ConfigError with fewer than three points.
double qse_slope(const std::vector<double>& snr_db, const std::vector<double>& mse_db);

/// Slope from nmse_dB records of a single scheme and beta_fb inside [lo_db, hi_db].
double estimate_qse_slope(const std::vector<SweepRecord>& records, double lo_db, double hi_db);

/// (L, beta_fb) settings of the table1 experiment.
const std::vector<std::pair<int, int>>& table1_settings();

/// table1 experiment: the user sees h itself. The observation SNR is large enough that
/// the user-side error sits ~200 dB under the channel; only the UL is noisy.
inline constexpr double kDirectAccessSnr = 1e20;

/// Configuration of the table1 experiment (UL SNR = ul_snr_db).
SystemConfig table1_config(const ExperimentSpec& spec);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace csifb
