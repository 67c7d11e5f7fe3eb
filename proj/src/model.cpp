#include "csifb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace csifb {

std::vector<int> comb_pilot_subcarriers(int subcarriers, int count) {
  std::vector<int> out;
  if (count <= 0 || subcarriers <= 0) return out;
  const double spacing = static_cast<double>(subcarriers) / count;
  for (int i = 0; i < count; ++i)
    out.push_back(std::min(subcarriers - 1, static_cast<int>(std::floor(spacing * i + spacing / 2))));
  return out;
}

double SystemConfig::kappa() const {
  if (kappa_override) return *kappa_override;
  return 1.0 - static_cast<double>(users) / antennas;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid system config: " + m); };
  if (antennas < 1) fail("antennas must be >= 1");
  if (subcarriers < 1) fail("subcarriers must be >= 1");
  if (users < 1) fail("users must be >= 1");
  if (users > antennas) fail("users must not exceed antennas");
  if (pilot_symbols < 1) fail("pilot_symbols must be >= 1");
  if (pilot_symbols > coherence_symbols) fail("pilot_symbols must not exceed coherence_symbols");
  if (pilot_count() > subcarriers) fail("more pilot subcarriers than subcarriers");
  if (!(subcarrier_spacing_hz > 0)) fail("subcarrier_spacing_hz must be positive");
  if (!(max_delay_s >= 0)) fail("max_delay_s must be nonnegative");
  if (!(snr_dl >= 0) || !std::isfinite(snr_dl)) fail("snr_dl must be finite and nonnegative");
  const double k = kappa();
  if (!(k >= 0.0 && k <= 1.0)) fail("kappa must lie in [0, 1]");
  for (std::size_t i = 0; i < pilot_subcarriers.size(); ++i) {
    if (pilot_subcarriers[i] < 0 || pilot_subcarriers[i] >= subcarriers)
      fail("pilot subcarrier index out of range");
    if (i > 0 && pilot_subcarriers[i] <= pilot_subcarriers[i - 1])
      fail("pilot subcarriers must be distinct and sorted");
  }
}

double ChannelGeometry::total_power() const {
  double s = 0.0;
  for (const auto& p : paths) s += p.power;
  return s;
}

ChannelGeometry sample_geometry(Rng& rng, int path_count, const SystemConfig& cfg) {
  if (path_count < 1) throw ConfigError("sample_geometry: path count must be >= 1");
  constexpr double max_angle = std::numbers::pi / 3.0;
  ChannelGeometry geo;
  geo.paths.resize(static_cast<std::size_t>(path_count));
  for (auto& p : geo.paths) {
    p.angle_rad = rng.uniform(-max_angle, max_angle);
    p.delay_s = rng.uniform(0.0, cfg.max_delay_s);
    p.power = rng.uniform(0.4, 0.8);
  }
  const double total = geo.total_power();
  for (auto& p : geo.paths) p.power /= total;
  return geo;
}

CVector steering_vector(double theta_rad, int antennas) {
  CVector a(antennas);
  const double phase = std::numbers::pi * std::sin(theta_rad);
  for (int m = 0; m < antennas; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

CVector delay_vector(double tau_s, int subcarriers, double spacing_hz) {
  CVector b(subcarriers);
  const double phase = -2.0 * std::numbers::pi * spacing_hz * tau_s;
  for (int n = 0; n < subcarriers; ++n) b(n) = std::polar(1.0, phase * n);
  return b;
}

ChannelCovariance::ChannelCovariance(int antennas, int subcarriers, RVector eigenvalues,
                                     CMatrix basis)
    : antennas_(antennas),
      subcarriers_(subcarriers),
      eigenvalues_(std::move(eigenvalues)),
      basis_(std::move(basis)) {
  if (basis_.rows() != static_cast<Index>(antennas_) * subcarriers_ ||
      basis_.cols() != eigenvalues_.size())
    throw ConfigError("ChannelCovariance: basis shape does not match M*N x rank");
}

ChannelCovariance ChannelCovariance::from_dense(const CMatrix& c, int antennas, int subcarriers) {
  if (c.rows() != static_cast<Index>(antennas) * subcarriers)
    throw ConfigError("ChannelCovariance::from_dense: size is not M*N");
  Spectrum s = psd_eig(c);
  const Index r = numeric_rank(s.values);
  return ChannelCovariance(antennas, subcarriers, s.values.head(r), s.basis.leftCols(r));
}

RVector ChannelCovariance::full_spectrum() const {
  RVector out = RVector::Zero(dim());
  out.head(rank()) = eigenvalues_;
  return out;
}

CMatrix ChannelCovariance::dense() const { return expand(core()); }

CMatrix ChannelCovariance::expand(const CMatrix& core) const {
  return basis_ * core * basis_.adjoint();
}

CMatrix ChannelCovariance::block(const CMatrix& core, int subcarrier) const {
  if (subcarrier < 0 || subcarrier >= subcarriers_)
    throw ConfigError("ChannelCovariance::block: subcarrier out of range");
  const CMatrix rows = basis_rows(subcarrier);
  return rows * core * rows.adjoint();
}

CMatrix ChannelCovariance::block(int subcarrier) const { return block(core(), subcarrier); }

namespace {

CMatrix path_matrix(const ChannelGeometry& geo, const SystemConfig& cfg) {
  const int m_ant = cfg.antennas;
  const int n_sub = cfg.subcarriers;
  CMatrix p(static_cast<Index>(m_ant) * n_sub, geo.path_count());
  for (int l = 0; l < geo.path_count(); ++l) {
    const auto& path = geo.paths[static_cast<std::size_t>(l)];
    if (!(path.power >= 0.0)) throw ConfigError("negative path power");
    const CVector a = steering_vector(path.angle_rad, m_ant);
    const CVector b = delay_vector(path.delay_s, n_sub, cfg.subcarrier_spacing_hz);
    const double g = std::sqrt(path.power);
    for (int n = 0; n < n_sub; ++n)
      p.col(l).segment(static_cast<Index>(n) * m_ant, m_ant) = g * b(n) * a;
  }
  return p;
}

}  // namespace

ChannelCovariance build_covariance(const ChannelGeometry& geo, const SystemConfig& cfg) {
  const CMatrix p = path_matrix(geo, cfg);
  const Index dim = p.rows();
  const Index k = std::min(dim, p.cols());
  if (k == 0) return ChannelCovariance(cfg.antennas, cfg.subcarriers, RVector(0), CMatrix(dim, 0));
  // C = P P^H = Q (R R^H) Q^H
  Eigen::HouseholderQR<CMatrix> qr(p);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, k);
  const CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Spectrum s = psd_eig(r * r.adjoint());
  const Index rank = numeric_rank(s.values);
  CMatrix basis = q * s.basis.leftCols(rank);
  normalize_phases(basis);
  return ChannelCovariance(cfg.antennas, cfg.subcarriers, s.values.head(rank), std::move(basis));
}

CVector sample_channel(const ChannelGeometry& geo, const SystemConfig& cfg, Rng& rng) {
  const CMatrix p = path_matrix(geo, cfg);
  CVector h = CVector::Zero(p.rows());
  for (Index l = 0; l < p.cols(); ++l) h += rng.complex_normal() * p.col(l);
  return h;
}

PilotMatrix::PilotMatrix(int antennas, int subcarriers, std::vector<int> probed,
                         std::vector<CMatrix> blocks)
    : antennas_(antennas),
      subcarriers_(subcarriers),
      probed_(std::move(probed)),
      blocks_(std::move(blocks)) {
  if (probed_.size() != blocks_.size()) throw ConfigError("PilotMatrix: one block per probed subcarrier");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (probed_[i] < 0 || probed_[i] >= subcarriers_) throw ConfigError("PilotMatrix: subcarrier out of range");
    if (blocks_[i].cols() != antennas_) throw ConfigError("PilotMatrix: block width must be M");
    if (blocks_[i].rows() != blocks_.front().rows()) throw ConfigError("PilotMatrix: unequal block heights");
  }
}

PilotMatrix PilotMatrix::direct_observation(int antennas, int subcarriers, double snr) {
  std::vector<int> probed(static_cast<std::size_t>(subcarriers));
  std::vector<CMatrix> blocks;
  for (int n = 0; n < subcarriers; ++n) {
    probed[static_cast<std::size_t>(n)] = n;
    blocks.push_back(std::sqrt(snr) * CMatrix::Identity(antennas, antennas));
  }
  return PilotMatrix(antennas, subcarriers, std::move(probed), std::move(blocks));
}

Index PilotMatrix::rows() const {
  return blocks_.empty() ? 0 : blocks_.front().rows() * static_cast<Index>(blocks_.size());
}

CMatrix PilotMatrix::dense() const {
  CMatrix x = CMatrix::Zero(rows(), cols());
  const Index tp = blocks_.empty() ? 0 : blocks_.front().rows();
  for (std::size_t l = 0; l < blocks_.size(); ++l)
    x.block(static_cast<Index>(l) * tp, static_cast<Index>(probed_[l]) * antennas_, tp, antennas_) = blocks_[l];
  return x;
}

CVector PilotMatrix::apply(const CVector& h) const {
  if (h.size() != cols()) throw ConfigError("PilotMatrix::apply: channel length is not M*N");
  CVector y(rows());
  const Index tp = blocks_.empty() ? 0 : blocks_.front().rows();
  for (std::size_t l = 0; l < blocks_.size(); ++l)
    y.segment(static_cast<Index>(l) * tp, tp) =
        blocks_[l] * h.segment(static_cast<Index>(probed_[l]) * antennas_, antennas_);
  return y;
}

CMatrix PilotMatrix::project(const CMatrix& basis) const {
  if (basis.rows() != cols()) throw ConfigError("PilotMatrix::project: basis rows are not M*N");
  CMatrix out(rows(), basis.cols());
  const Index tp = blocks_.empty() ? 0 : blocks_.front().rows();
  for (std::size_t l = 0; l < blocks_.size(); ++l)
    out.middleRows(static_cast<Index>(l) * tp, tp) =
        blocks_[l] * basis.middleRows(static_cast<Index>(probed_[l]) * antennas_, antennas_);
  return out;
}

PilotMatrix PilotMatrix::scaled(double factor) const {
  std::vector<CMatrix> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(factor * b);
  return PilotMatrix(antennas_, subcarriers_, probed_, std::move(blocks));
}

PilotMatrix build_pilot_matrix(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<CMatrix> blocks;
  const double variance = cfg.snr_dl / cfg.antennas;
  for (int l = 0; l < cfg.pilot_count(); ++l)
    blocks.push_back(rng.complex_normal_matrix(cfg.pilot_symbols, cfg.antennas, variance));
  return PilotMatrix(cfg.antennas, cfg.subcarriers, cfg.pilot_subcarriers, std::move(blocks));
}

CVector observe_pilots(const PilotMatrix& x, const CVector& h, Rng& rng, double noise_variance) {
  CVector y = x.apply(h);
  if (noise_variance > 0.0) y += rng.complex_normal_vector(y.size(), noise_variance);
  return y;
}

}  // namespace csifb
