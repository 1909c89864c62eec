// Test-side oracles kept independent of the implementation paths they check.
#pragma once

#include <functional>

#include "lisec/psd_geometry.hpp"
#include "lisec/rates.hpp"

namespace lisec::oracle {

inline CMat random_hermitian(int n, Rng& rng, double scale = 1.0) {
  return scale * hermitize(rng.cnormal_matrix(n, n));
}

inline CMat random_psd(int n, Rng& rng, double trace_target = 1.0) {
  CMat x = rng.cnormal_matrix(n, n);
  CMat p = hermitize(x * x.adjoint());
  return trace_target * p / p.trace().real();
}

inline CVec random_unit(int n, Rng& rng) {
  CVec v = rng.cnormal_vector(n);
  return v / v.norm();
}

inline PhaseVector random_phases(int n, Rng& rng) {
  CVec v(n);
  for (int k = 0; k < n; ++k) v(k) = std::polar(1.0, 2.0 * kPi * rng.uniform() - kPi);
  return PhaseVector{v};
}

/// Receiver term recomputed through explicit Theta matrices instead of the
/// elementwise phase products: Theta = diag(conj(v)).
inline double receiver_term_via_theta(const CovariancePair& pair, const PhaseVector& phases,
                                      const ChannelRealization& ch) {
  const Eigen::Index n_i = phases.v.size();
  CMat theta = CMat::Zero(n_i, n_i);
  for (Eigen::Index k = 0; k < n_i; ++k) theta(k, k) = std::conj(phases.v(k));
  const CMat gs = theta * ch.g.adjoint() * pair.sigma_s * ch.g * theta.adjoint();
  const CMat gz = theta * ch.g.adjoint() * pair.sigma_z * ch.g * theta.adjoint();
  const double num = ch.rho_r * (ch.h_r.adjoint() * gs * ch.h_r).real()(0);
  const double den = 1.0 + ch.rho_r * (ch.h_r.adjoint() * gz * ch.h_r).real()(0);
  return std::log2(1.0 + num / den);
}

/// Central-difference directional derivative of a scalar function of the
/// covariance pair along a Hermitian direction.
inline double central_difference(const std::function<double(const CovariancePair&)>& f,
                                 const CovariancePair& at, const CMat& dir_s, const CMat& dir_z,
                                 double eps) {
  const CovariancePair plus{at.sigma_s + eps * dir_s, at.sigma_z + eps * dir_z};
  const CovariancePair minus{at.sigma_s - eps * dir_s, at.sigma_z - eps * dir_z};
  return (f(plus) - f(minus)) / (2.0 * eps);
}

/// Euclidean projection onto X2 by Dykstra's alternating projections between
/// the PSD product cone and the trace halfspace. An independent route with
/// no multiplier bisection.
inline CovariancePair dykstra_project_x2(const CMat& p_s, const CMat& p_z, int iters = 400) {
  const int n = static_cast<int>(p_s.rows());
  CMat xs = p_s, xz = p_z;
  CMat ps1 = CMat::Zero(n, n), pz1 = CMat::Zero(n, n);
  CMat ps2 = CMat::Zero(n, n), pz2 = CMat::Zero(n, n);
  for (int it = 0; it < iters; ++it) {
    // PSD cone pair
    CMat ys = project_psd(hermitize(xs + ps1));
    CMat yz = project_psd(hermitize(xz + pz1));
    ps1 = (xs + ps1) - ys;
    pz1 = (xz + pz1) - yz;
    // trace halfspace tr(Xs)+tr(Xz) <= 1
    const CMat as = ys + ps2, az = yz + pz2;
    const double excess = as.trace().real() + az.trace().real() - 1.0;
    const double shift = std::max(0.0, excess / (2.0 * n));
    xs = as - shift * CMat::Identity(n, n);
    xz = az - shift * CMat::Identity(n, n);
    ps2 = as - xs;
    pz2 = az - xz;
  }
  return {project_psd(hermitize(xs)), project_psd(hermitize(xz))};
}

/// Objective of the proximal subproblem the prox operator is meant to solve.
inline double prox_objective(const CovariancePair& x, const CovariancePair& current,
                             const GradientPair& grads, double r) {
  return 2.0 * real_inner(grads.g_s, x.sigma_s) + 2.0 * real_inner(grads.g_z, x.sigma_z) +
         (x.sigma_s - current.sigma_s).squaredNorm() / r +
         (x.sigma_z - current.sigma_z).squaredNorm() / r;
}

inline CovariancePair random_feasible(int n, Rng& rng, double total = 0.9) {
  const double mass = total * rng.uniform();
  const double split = rng.uniform();
  return {random_psd(n, rng, mass * split), random_psd(n, rng, mass * (1.0 - split))};
}

}  // namespace lisec::oracle
