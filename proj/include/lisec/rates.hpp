#pragma once

#include <Eigen/Cholesky>
#include <cmath>

#include "lisec/model.hpp"
#include "lisec/quadrature.hpp"

namespace lisec {

/// Message/AN covariance pair on the feasible set
/// X2 = { both Hermitian PSD, tr(sigma_s + sigma_z) <= 1 }.
struct CovariancePair {
  CMat sigma_s;
  CMat sigma_z;

  static CovariancePair zero(int n_t) {
    return {CMat::Zero(n_t, n_t), CMat::Zero(n_t, n_t)};
  }

  /// Isotropic full-power message covariance, the standard feasible point.
  static CovariancePair isotropic(int n_t) {
    return {CMat::Identity(n_t, n_t) / static_cast<double>(n_t), CMat::Zero(n_t, n_t)};
  }

  double trace_sum() const { return sigma_s.trace().real() + sigma_z.trace().real(); }

  bool is_feasible(double herm_tol = 1e-10, double eig_tol = 1e-9,
                   double trace_tol = 1e-9) const {
    if (hermitian_deviation(sigma_s) > herm_tol || hermitian_deviation(sigma_z) > herm_tol)
      return false;
    Eigen::SelfAdjointEigenSolver<CMat> es_s(sigma_s, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<CMat> es_z(sigma_z, Eigen::EigenvaluesOnly);
    if (es_s.eigenvalues().minCoeff() < -eig_tol) return false;
    if (es_z.eigenvalues().minCoeff() < -eig_tol) return false;
    return trace_sum() <= 1.0 + trace_tol;
  }
};

/// Unit-modulus LIS phase vector, v = diag(Theta^H).
struct PhaseVector {
  CVec v;

  static PhaseVector ones(int n_i) { return {CVec::Ones(n_i)}; }

  static PhaseVector from_thetas(const RVec& thetas) {
    CVec v(thetas.size());
    for (Eigen::Index k = 0; k < thetas.size(); ++k) v(k) = std::polar(1.0, -thetas(k));
    return {v};
  }

  double max_modulus_error() const {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      worst = std::max(worst, std::abs(std::abs(v(k)) - 1.0));
    return worst;
  }
};

struct RateEstimate {
  double value = 0.0;      ///< bits/s/Hz
  double std_error = 0.0;  ///< bits/s/Hz
  int n_samples = 0;
};

/// Conjugate-convention gradients: the first-order model is
/// f(Sigma + Delta) ~= f(Sigma) + 2 <g, Delta>.
struct GradientPair {
  CMat g_s;
  CMat g_z;

  double norm() const { return std::sqrt(g_s.squaredNorm() + g_z.squaredNorm()); }
};

/// Receive vector seen at the AP through the surface: G Theta^H h_r.
inline CVec effective_receive_vector(const PhaseVector& phases, const ChannelRealization& ch) {
  return ch.g * ch.h_r.cwiseProduct(phases.v);
}

/// Effective AP-side eavesdropper channel for one sample: S = G * H_e.
inline CMat effective_eve_channel(const CMat& g, const CMat& h_e_sample) {
  return g * h_e_sample;
}

/// log2 det(I + rho * S^H Sigma S) for Hermitian PSD Sigma; always >= 0.
inline double eve_logdet_eff(const CMat& sigma, const CMat& s_eff, double rho_e) {
  require_hermitian(sigma, 1e-8, "eve_logdet");
  if (rho_e == 0.0) return 0.0;
  const Eigen::Index n_e = s_eff.cols();
  CMat m = CMat::Identity(n_e, n_e) + rho_e * (s_eff.adjoint() * sigma * s_eff);
  m = hermitize(m);
  Eigen::LLT<CMat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("eve_logdet: Cholesky failed (sigma not PSD?)");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n_e; ++i) log_det += std::log(llt.matrixLLT()(i, i).real());
  return 2.0 * log_det / kLn2;
}

inline double eve_logdet(const CMat& sigma, const CMat& h_e_sample, const CMat& g,
                         double rho_e) {
  return eve_logdet_eff(sigma, effective_eve_channel(g, h_e_sample), rho_e);
}

/// Receiver-side log term of the AN-aided rate; reduces to the non-AN form
/// when sigma_z = 0.
inline double receiver_term(const CovariancePair& pair, const PhaseVector& phases,
                            const ChannelRealization& ch) {
  if (pair.sigma_s.rows() != ch.g.rows() || phases.v.size() != ch.h_r.size())
    throw std::invalid_argument("receiver_term: dimension mismatch");
  const CVec a = effective_receive_vector(phases, ch);
  const double num = ch.rho_r * (a.adjoint() * pair.sigma_s * a).real()(0);
  const double den = 1.0 + ch.rho_r * (a.adjoint() * pair.sigma_z * a).real()(0);
  return std::log1p(num / den) / kLn2;
}

/// One-sample integrand of the AN-aided secrecy rate.
inline double c3_integrand(const CovariancePair& pair, const PhaseVector& phases,
                           const ChannelRealization& ch, const CMat& h_e_sample) {
  const CMat s_eff = effective_eve_channel(ch.g, h_e_sample);
  return receiver_term(pair, phases, ch) -
         eve_logdet_eff(pair.sigma_s + pair.sigma_z, s_eff, ch.rho_e) +
         eve_logdet_eff(pair.sigma_z, s_eff, ch.rho_e);
}

/// Sample-average secrecy rate over a fixed eavesdropper sample set.
inline double c_bar_3(const CovariancePair& pair, const PhaseVector& phases,
                      const ChannelRealization& ch, const EveSampleSet& samples) {
  if (samples.samples.empty()) throw std::invalid_argument("c_bar_3: empty sample set");
  std::vector<double> vals;
  vals.reserve(samples.samples.size());
  const double recv = receiver_term(pair, phases, ch);
  for (const CMat& h_e : samples.samples) {
    const CMat s_eff = effective_eve_channel(ch.g, h_e);
    vals.push_back(recv - eve_logdet_eff(pair.sigma_s + pair.sigma_z, s_eff, ch.rho_e) +
                   eve_logdet_eff(pair.sigma_z, s_eff, ch.rho_e));
  }
  return pairwise_mean(vals);
}

/// Unscaled receiver gradient term rho_r a a^H / (1 + rho_r a^H X a), nats.
inline CMat recv_grad_nats(const CMat& x, const CVec& a, double rho_r) {
  const double den = 1.0 + rho_r * (a.adjoint() * x * a).real()(0);
  return (rho_r / den) * (a * a.adjoint());
}

/// Unscaled eavesdropper gradient term
/// rho_e S (I + rho_e S^H X S)^{-1} S^H for one sample, nats.
inline CMat eve_grad_nats(const CMat& x, const CMat& s_eff, double rho_e) {
  const Eigen::Index n_e = s_eff.cols();
  CMat m = CMat::Identity(n_e, n_e) + rho_e * (s_eff.adjoint() * x * s_eff);
  m = hermitize(m);
  const CMat inv = m.llt().solve(CMat::Identity(n_e, n_e));
  return hermitize(rho_e * (s_eff * inv * s_eff.adjoint()));
}

/// Gradient of c_bar_3 in the conjugate convention, bits.
inline GradientPair grad_c3(const CovariancePair& pair, const PhaseVector& phases,
                            const ChannelRealization& ch, const EveSampleSet& samples) {
  if (samples.samples.empty()) throw std::invalid_argument("grad_c3: empty sample set");
  const CVec a = effective_receive_vector(phases, ch);
  const CMat sum = pair.sigma_s + pair.sigma_z;
  const int n_t = static_cast<int>(ch.g.rows());
  CMat eve_sum = CMat::Zero(n_t, n_t);
  CMat eve_z = CMat::Zero(n_t, n_t);
  for (const CMat& h_e : samples.samples) {
    const CMat s_eff = effective_eve_channel(ch.g, h_e);
    eve_sum += eve_grad_nats(sum, s_eff, ch.rho_e);
    eve_z += eve_grad_nats(pair.sigma_z, s_eff, ch.rho_e);
  }
  const double k = static_cast<double>(samples.samples.size());
  eve_sum /= k;
  eve_z /= k;
  const CMat mr_sum = recv_grad_nats(sum, a, ch.rho_r);
  const CMat mr_z = recv_grad_nats(pair.sigma_z, a, ch.rho_r);
  const double scale = 1.0 / (2.0 * kLn2);
  GradientPair grad;
  grad.g_s = hermitize(scale * (mr_sum - eve_sum));
  grad.g_z = hermitize(scale * (mr_sum - mr_z - eve_sum + eve_z));
  return grad;
}

/// Per-sample Lipschitz bound (rho_e N_e ||S S^H||_F)^2 for the nats-form
/// eavesdropper gradient.
inline double lipschitz_bound_sample(const CMat& g, const CMat& h_e_sample, double rho_e,
                                     int n_e) {
  const CMat s_eff = effective_eve_channel(g, h_e_sample);
  const double nrm = (s_eff * s_eff.adjoint()).norm();
  const double b = rho_e * static_cast<double>(n_e) * nrm;
  return b * b;
}

/// Monte Carlo estimate of one of the four secrecy objectives at a fixed
/// operating point. Fresh eavesdropper (and, for C2/C4, receiver) channels
/// are drawn from rng; G and rho's come from the realization.
inline RateEstimate secrecy_rate(ObjectiveId objective, const CovariancePair& pair,
                                 const PhaseVector& phases, const ChannelRealization& ch,
                                 int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("secrecy_rate: need n_samples >= 1");
  if (!objective_uses_an(objective) && pair.sigma_z.norm() > 0.0)
    throw std::invalid_argument("secrecy_rate: C1/C2 require sigma_z = 0");
  const Eigen::Index n_i = ch.g.cols();
  const Eigen::Index n_e = ch.h_e.cols();
  const bool resample_hr = objective_hr_statistical(objective);
  const CMat sum = pair.sigma_s + pair.sigma_z;

  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n_samples));
  double recv_fixed = 0.0;
  ChannelRealization scratch;
  if (resample_hr) scratch = ch;
  if (!resample_hr) recv_fixed = receiver_term(pair, phases, ch);
  for (int i = 0; i < n_samples; ++i) {
    double recv = recv_fixed;
    if (resample_hr) {
      scratch.h_r = rng.cnormal_vector(n_i);
      recv = receiver_term(pair, phases, scratch);
    }
    const CMat s_eff = effective_eve_channel(ch.g, rng.cnormal_matrix(n_i, n_e));
    double val = recv - eve_logdet_eff(sum, s_eff, ch.rho_e);
    if (objective_uses_an(objective)) val += eve_logdet_eff(pair.sigma_z, s_eff, ch.rho_e);
    vals.push_back(val);
  }
  const MeanStdErr ms = mean_stderr(vals);
  return {ms.mean, ms.std_error, n_samples};
}

}  // namespace lisec
