#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>

#include "lisec/rates.hpp"

namespace lisec {

/// Eigenvalue clipping onto the PSD cone; Frobenius-nearest PSD matrix.
inline CMat project_psd(const CMat& h) {
  require_hermitian(h, 1e-8, "project_psd");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(h));
  RVec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::max(d(i), 0.0);
  return hermitize(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
}

struct ProxResult {
  CovariancePair pair;
  double multiplier = 0.0;  ///< lambda_bar of the trace constraint
  CMat gap_s;               ///< (sigma_s - sigma_s^o) / r
  CMat gap_z;

  double gap_norm() const { return std::sqrt(gap_s.squaredNorm() + gap_z.squaredNorm()); }
};

namespace detail {

struct ShiftedClip {
  Eigen::SelfAdjointEigenSolver<CMat> es;

  explicit ShiftedClip(const CMat& m) : es(hermitize(m)) {}

  double clipped_trace(double shift) const {
    double t = 0.0;
    const RVec& d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) t += std::max(d(i) - shift, 0.0);
    return t;
  }

  CMat assemble(double shift) const {
    RVec d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::max(d(i) - shift, 0.0);
    return hermitize(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
  }
};

}  // namespace detail

/// Euclidean projection of an arbitrary Hermitian pair onto X2. The trace
/// multiplier is found by bisection on the shift, whose clipped trace is
/// continuous and nonincreasing.
inline std::pair<CovariancePair, double> project_pair_onto_x2(const CMat& p_s, const CMat& p_z) {
  detail::ShiftedClip cs(p_s);
  detail::ShiftedClip cz(p_z);
  const auto total = [&](double shift) { return cs.clipped_trace(shift) + cz.clipped_trace(shift); };

  double shift = 0.0;
  if (total(0.0) > 1.0) {
    double lo = 0.0;
    double hi = std::max({cs.es.eigenvalues().cwiseAbs().maxCoeff(),
                          cz.es.eigenvalues().cwiseAbs().maxCoeff(), 1.0});
    while (total(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (total(mid) > 1.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    shift = hi;  // feasible side of the bracket
  }
  CovariancePair out{cs.assemble(shift), cz.assemble(shift)};
  return {out, shift};
}

/// Proximal point of the linearized objective over X2:
///   argmin 2<G_s,X_s> + 2<G_z,X_z> + (1/r)(||X_s-S_s||^2 + ||X_z-S_z||^2),
/// solved as [S - r(G + lambda_bar I)]^+ with the multiplier from bisection.
inline ProxResult prox_pair(const CovariancePair& current, const GradientPair& grads,
                            double r) {
  if (!(r > 0.0)) throw std::invalid_argument("prox_pair: step size must be positive");
  auto [pair, shift] = project_pair_onto_x2(current.sigma_s - r * grads.g_s,
                                            current.sigma_z - r * grads.g_z);
  ProxResult res;
  res.pair = std::move(pair);
  res.multiplier = shift / r;
  res.gap_s = (current.sigma_s - res.pair.sigma_s) / r;
  res.gap_z = (current.sigma_z - res.pair.sigma_z) / r;
  return res;
}

/// Projected-gradient gap (current - prox)/r; zero exactly at stationary
/// points of the constrained problem.
inline std::pair<CMat, CMat> projected_gradient_gap(const CovariancePair& current,
                                                    const GradientPair& grads, double r) {
  ProxResult res = prox_pair(current, grads, r);
  return {res.gap_s, res.gap_z};
}

}  // namespace lisec
