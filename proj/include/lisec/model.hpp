#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "lisec/common.hpp"

namespace lisec {

enum class ObjectiveId { C1, C2, C3, C4 };

inline bool objective_uses_an(ObjectiveId id) {
  return id == ObjectiveId::C3 || id == ObjectiveId::C4;
}

/// C2/C4 treat the receiver channel as i.i.d. Gaussian known only in
/// distribution, so expectations resample it.
inline bool objective_hr_statistical(ObjectiveId id) {
  return id == ObjectiveId::C2 || id == ObjectiveId::C4;
}

inline std::string objective_name(ObjectiveId id) {
  switch (id) {
    case ObjectiveId::C1: return "C1";
    case ObjectiveId::C2: return "C2";
    case ObjectiveId::C3: return "C3";
    case ObjectiveId::C4: return "C4";
  }
  return "?";
}

struct Dims {
  int n_t = 16;  ///< AP antennas
  int n_i = 32;  ///< LIS reflecting elements
  int n_e = 10;  ///< eavesdropper antennas

  void validate() const {
    if (n_t < 1 || n_i < 1 || n_e < 1)
      throw std::invalid_argument("Dims: all dimensions must be strictly positive");
  }
};

struct Geometry {
  Vec3 ap_pos{0.0, 0.0, 15.0};
  Vec3 lis_pos{0.0, 50.0, 15.0};
  Vec3 rx_pos{0.0, 45.0, 2.0};
  Vec3 eve_pos{3.0, 44.0, 2.0};
  double c0 = 1e-3;  ///< linear power gain at the reference distance (-30 dB)
  double d0 = 1.0;   ///< reference distance, meters
  double zeta_ai = 2.0;
  double zeta_ir = 2.8;
  double zeta_ie = 3.0;

  void validate() const {
    if (c0 <= 0.0 || d0 <= 0.0)
      throw std::invalid_argument("Geometry: c0 and d0 must be positive");
    if (zeta_ai < 0.0 || zeta_ir < 0.0 || zeta_ie < 0.0)
      throw std::invalid_argument("Geometry: path-loss exponents must be nonnegative");
  }
};

struct ChannelConfig {
  Dims dims;
  Geometry geometry;
  double rician_k = 10.0;
  double noise_power_dbm = -80.0;
  double tx_power_dbm = 15.0;
  double los_aod = kPi / 6.0;  ///< AP-side departure angle of the LoS ray
  double los_aoa = kPi / 6.0;  ///< LIS-side arrival angle

  void validate() const {
    dims.validate();
    geometry.validate();
    if (rician_k < 0.0) throw std::invalid_argument("ChannelConfig: rician_k must be nonnegative");
  }
};

/// One draw of all channel matrices plus the effective transmit-side SNRs.
struct ChannelRealization {
  CMat g;     ///< AP-LIS channel, n_t x n_i
  CVec h_r;   ///< LIS-receiver channel, n_i
  CMat h_e;   ///< LIS-eavesdropper channel, n_i x n_e
  double rho_r = 0.0;
  double rho_e = 0.0;
  bool hr_statistical = false;  ///< true for C2/C4: rate evaluation resamples h_r
};

struct EveSampleSet {
  std::vector<CMat> samples;
  std::uint64_t seed = 0;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Distance-dependent path loss c0 * (d/d0)^(-zeta), linear power gain.
inline double path_loss(double d, double zeta, double c0, double d0) {
  if (!(d > 0.0) || !(d0 > 0.0))
    throw std::invalid_argument("path_loss: distances must be positive");
  return c0 * std::pow(d / d0, -zeta);
}

/// Folds transmit power, the two-hop path losses and the noise floor into the
/// per-link SNR pair (rho_r, rho_e).
inline std::pair<double, double> effective_snrs(const ChannelConfig& cfg) {
  cfg.validate();
  const Geometry& g = cfg.geometry;
  const double d_ai = (g.ap_pos - g.lis_pos).norm();
  const double d_ir = (g.lis_pos - g.rx_pos).norm();
  const double d_ie = (g.lis_pos - g.eve_pos).norm();
  if (d_ai <= 0.0 || d_ir <= 0.0 || d_ie <= 0.0)
    throw std::invalid_argument("effective_snrs: coincident node positions");
  const double p_lin = dbm_to_watts(cfg.tx_power_dbm);
  const double noise_lin = dbm_to_watts(cfg.noise_power_dbm);
  const double l_ai = path_loss(d_ai, g.zeta_ai, g.c0, g.d0);
  const double rho_r = p_lin * l_ai * path_loss(d_ir, g.zeta_ir, g.c0, g.d0) / noise_lin;
  const double rho_e = p_lin * l_ai * path_loss(d_ie, g.zeta_ie, g.c0, g.d0) / noise_lin;
  return {rho_r, rho_e};
}

/// i.i.d. CN(0,1) matrix; real/imag parts are independent N(0, 1/2).
inline CMat sample_iid_cn(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("sample_iid_cn: empty shape");
  return rng.cnormal_matrix(rows, cols);
}

/// Half-wavelength ULA steering vector, unit-modulus entries.
inline CVec ula_steering(int n, double angle) {
  CVec a(n);
  for (int k = 0; k < n; ++k) a(k) = std::polar(1.0, kPi * k * std::sin(angle));
  return a;
}

/// Rician power split (LoS, NLoS). The complement form keeps the pair
/// summing to one exactly in floating point.
inline std::pair<double, double> rician_weight_squares(double k) {
  const double w_los_sq = k / (1.0 + k);
  return {w_los_sq, 1.0 - w_los_sq};
}

/// Rician AP-LIS channel: deterministic steering outer product for the LoS
/// ray mixed with an i.i.d. CN(0,1) scattered component.
inline CMat sample_g_rician(const ChannelConfig& cfg, Rng& rng) {
  if (cfg.rician_k < 0.0) throw std::invalid_argument("sample_g_rician: negative Rician factor");
  const CVec a_t = ula_steering(cfg.dims.n_t, cfg.los_aod);
  const CVec a_i = ula_steering(cfg.dims.n_i, cfg.los_aoa);
  const CMat g_los = a_t * a_i.adjoint();
  const CMat g_nlos = sample_iid_cn(cfg.dims.n_t, cfg.dims.n_i, rng);
  const auto [w_los_sq, w_nlos_sq] = rician_weight_squares(cfg.rician_k);
  return std::sqrt(w_los_sq) * g_los + std::sqrt(w_nlos_sq) * g_nlos;
}

/// Rician LIS-receiver channel for the known-CSI objectives.
inline CVec sample_hr_rician(const ChannelConfig& cfg, Rng& rng) {
  const CVec a_i = ula_steering(cfg.dims.n_i, cfg.los_aoa);
  const CVec nlos = rng.cnormal_vector(cfg.dims.n_i);
  const auto [w_los_sq, w_nlos_sq] = rician_weight_squares(cfg.rician_k);
  return std::sqrt(w_los_sq) * a_i + std::sqrt(w_nlos_sq) * nlos;
}

inline ChannelRealization sample_channels(const ChannelConfig& cfg, ObjectiveId objective,
                                          Rng& rng) {
  cfg.validate();
  ChannelRealization ch;
  ch.g = sample_g_rician(cfg, rng);
  ch.hr_statistical = objective_hr_statistical(objective);
  // For C2/C4 the stored draw is only a representative sample; expectations
  // resample h_r from CN(0, I).
  ch.h_r = ch.hr_statistical ? CVec(rng.cnormal_vector(cfg.dims.n_i))
                             : sample_hr_rician(cfg, rng);
  ch.h_e = sample_iid_cn(cfg.dims.n_i, cfg.dims.n_e, rng);
  std::tie(ch.rho_r, ch.rho_e) = effective_snrs(cfg);
  return ch;
}

inline EveSampleSet make_eve_samples(const Dims& dims, int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("make_eve_samples: negative count");
  EveSampleSet set;
  set.seed = seed;
  set.samples.reserve(static_cast<std::size_t>(count));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) set.samples.push_back(sample_iid_cn(dims.n_i, dims.n_e, rng));
  return set;
}

}  // namespace lisec
