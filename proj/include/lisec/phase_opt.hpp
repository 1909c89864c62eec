#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "lisec/rates.hpp"

namespace lisec {

/// Quadratic forms of the phase-shift fractional program: the objective is
/// max_v (v^H Y1 v) / (v^H Y2 v) over unit-modulus v.
struct FractionalInstance {
  CMat y1;
  CMat y2;
};

struct PhaseOptReport {
  PhaseVector v;
  double mu_final = 0.0;
  std::vector<double> ratio_trace;
  std::vector<int> inner_iterations;
  bool hit_outer_cap = false;

  double final_ratio() const { return ratio_trace.empty() ? 0.0 : ratio_trace.back(); }
};

/// Y1 = rho_r D^H G^H Sigma_s G D, Y2 = I/N_I + rho_r D^H G^H Sigma_z G D
/// with D = diag(h_r), so that v^H Y1 v and v^H Y2 v reproduce the numerator
/// and denominator of the receiver log term exactly.
inline FractionalInstance build_fractional(const CovariancePair& pair,
                                           const ChannelRealization& ch) {
  if (pair.sigma_s.rows() != ch.g.rows())
    throw std::invalid_argument("build_fractional: dimension mismatch");
  const Eigen::Index n_i = ch.g.cols();
  const CMat gd = ch.g * ch.h_r.asDiagonal();  // G D, n_t x n_i
  FractionalInstance inst;
  inst.y1 = hermitize(ch.rho_r * (gd.adjoint() * pair.sigma_s * gd));
  inst.y2 = hermitize(CMat::Identity(n_i, n_i) / static_cast<double>(n_i) +
                      ch.rho_r * (gd.adjoint() * pair.sigma_z * gd));
  return inst;
}

inline double quadratic_form(const CVec& v, const CMat& m) {
  return (v.adjoint() * m * v).real()(0);
}

namespace detail {

/// One majorization step with lambda_max(phi) precomputed. Entries where
/// beta vanishes keep their previous phase.
inline CVec mm_step_core(const CVec& v, const CMat& phi, double lambda_max) {
  CVec beta = phi * v - lambda_max * v;
  CVec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double mag = std::abs(beta(k));
    out(k) = mag < 1e-14 ? v(k) : cx(std::polar(1.0, std::arg(beta(k))));
  }
  return out;
}

}  // namespace detail

/// MM update for min v^H phi v over unit-modulus v; never increases the
/// quadratic form.
inline PhaseVector mm_step(const PhaseVector& v, const CMat& phi) {
  require_hermitian(phi, 1e-8, "mm_step");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(phi), Eigen::EigenvaluesOnly);
  return {detail::mm_step_core(v.v, phi, es.eigenvalues().maxCoeff())};
}

/// Fractional phase optimization: bisection on mu with an inner MM loop
/// on v^H (Y2 - mu Y1) v. Returns the best unit-modulus v encountered.
inline PhaseOptReport optimize_phases(const CovariancePair& pair, const ChannelRealization& ch,
                                      const PhaseVector& v0, double tol = 1e-8) {
  if (!(tol > 0.0)) throw std::invalid_argument("optimize_phases: tol must be positive");
  if (v0.max_modulus_error() > 1e-9)
    throw std::invalid_argument("optimize_phases: v0 must be unit-modulus");
  constexpr int kMaxOuter = 100;
  constexpr int kMaxInner = 500;

  const FractionalInstance inst = build_fractional(pair, ch);
  PhaseOptReport report;
  report.v = v0;
  if (inst.y1.norm() <= 1e-300) {  // nothing to optimize
    report.ratio_trace.push_back(0.0);
    return report;
  }

  Eigen::SelfAdjointEigenSolver<CMat> es1(inst.y1, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<CMat> es2(inst.y2, Eigen::EigenvaluesOnly);
  const double y2_min = es2.eigenvalues().minCoeff();

  const auto ratio_of = [&](const CVec& v) {
    return quadratic_form(v, inst.y1) / quadratic_form(v, inst.y2);
  };

  CVec v = v0.v;
  double best_ratio = ratio_of(v);
  CVec v_best = v;
  double mu_max = es1.eigenvalues().maxCoeff() / y2_min;
  // The eigenvalue ratio bound can sit above the value at v0 only; widen the
  // bracket with the achieved ratio so it always contains the optimum.
  double mu_min = std::min(es1.eigenvalues().minCoeff() / y2_min, best_ratio);
  double mu = best_ratio;

  for (int outer = 0; outer < kMaxOuter; ++outer) {
    mu = 0.5 * (mu_min + mu_max);
    const CMat phi = inst.y2 - mu * inst.y1;
    Eigen::SelfAdjointEigenSolver<CMat> esp(phi, Eigen::EigenvaluesOnly);
    const double lam = esp.eigenvalues().maxCoeff();

    double obj = quadratic_form(v, phi);
    int inner = 0;
    for (; inner < kMaxInner; ++inner) {
      v = detail::mm_step_core(v, phi, lam);
      const double next = quadratic_form(v, phi);
      if (std::abs(next - obj) <= 1e-10 * std::max(1.0, std::abs(obj))) {
        obj = next;
        ++inner;
        break;
      }
      obj = next;
    }
    report.inner_iterations.push_back(inner);

    const double r = ratio_of(v);
    if (r > best_ratio) {
      best_ratio = r;
      v_best = v;
    }
    report.ratio_trace.push_back(best_ratio);

    const double slack = quadratic_form(v, inst.y1) - mu * quadratic_form(v, inst.y2);
    if (std::abs(slack) <= tol * quadratic_form(v, inst.y2)) break;
    if (slack > 0.0)
      mu_min = mu;
    else
      mu_max = mu;
    if (outer + 1 == kMaxOuter) report.hit_outer_cap = true;
  }

  report.v = PhaseVector{v_best};
  report.mu_final = mu;
  if (report.ratio_trace.empty()) report.ratio_trace.push_back(best_ratio);
  return report;
}

/// Phase alignment against a rank-one beamformer: v_k = exp(j arg(c_k)) with
/// c = diag(h_r^H) G^H omega. Zero entries default to phase 0.
inline PhaseVector closed_form_phase(const CVec& omega, const ChannelRealization& ch) {
  const CVec c = ch.h_r.conjugate().cwiseProduct(ch.g.adjoint() * omega);
  CVec v(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    v(k) = std::abs(c(k)) < 1e-14 ? cx(1.0, 0.0) : cx(std::polar(1.0, std::arg(c(k))));
  return {v};
}

}  // namespace lisec
