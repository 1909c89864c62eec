#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "lisec/phase_opt.hpp"
#include "lisec/quadrature.hpp"
#include "lisec/rates.hpp"

namespace lisec {

struct PhiResult {
  double value = 0.0;  ///< omega^H G G^H omega at the optimum
  CVec omega;
  double z = 0.0;
  bool constraint_active = true;  ///< false when h(v) degenerates to zero
};

struct AltOptReport {
  CVec omega;
  PhaseVector v;
  double z = 0.0;
  std::vector<double> objective_trace;  ///< bits, one entry per outer round
  int iterations = 0;
};

namespace detail {

/// min u^H Q u - 2 Re(beta^H u) over the unit sphere, Q Hermitian given by
/// its eigen-decomposition. The multiplier solves the secular equation
/// sum |c_i|^2/(q_i - nu)^2 = 1 on nu < q_min, with the usual hard case when
/// beta has no component on the bottom eigenspace.
struct SphereQuadratic {
  CVec u;
  double value = 0.0;
};

inline SphereQuadratic min_quadratic_on_sphere(const Eigen::SelfAdjointEigenSolver<CMat>& es,
                                               const CVec& beta) {
  const RVec& q = es.eigenvalues();
  const Eigen::Index m = q.size();
  const CVec c = es.eigenvectors().adjoint() * beta;
  const double q_min = q.minCoeff();
  const double scale = std::max({1.0, std::abs(q_min), q.cwiseAbs().maxCoeff()});

  SphereQuadratic out;
  if (beta.norm() < 1e-14) {  // pure eigenvalue problem
    Eigen::Index idx = 0;
    q.minCoeff(&idx);
    out.u = es.eigenvectors().col(idx);
    out.value = q_min;
    return out;
  }

  const auto norm2_at = [&](double nu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = q(i) - nu;
      s += std::norm(c(i)) / (d * d);
    }
    return s;
  };

  // Interior solvability just below q_min decides between the regular and
  // the hard case.
  const double edge_tol = 1e-12 * scale;
  double tail = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (q(i) > q_min + edge_tol) {
      const double d = q(i) - q_min;
      tail += std::norm(c(i)) / (d * d);
    }
  }
  double bottom_mass = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (q(i) <= q_min + edge_tol) bottom_mass += std::norm(c(i));

  CVec u_coords = CVec::Zero(m);
  if (bottom_mass < 1e-24 * scale * scale && tail <= 1.0) {
    // hard case: pad with the bottom eigenvector to reach the sphere
    for (Eigen::Index i = 0; i < m; ++i)
      if (q(i) > q_min + edge_tol) u_coords(i) = c(i) / (q(i) - q_min);
    const double pad = std::sqrt(std::max(0.0, 1.0 - u_coords.squaredNorm()));
    for (Eigen::Index i = 0; i < m; ++i) {
      if (q(i) <= q_min + edge_tol) {
        u_coords(i) = pad;
        break;
      }
    }
  } else {
    double hi = q_min - 1e-14 * scale;
    double lo = q_min - std::max(c.norm(), 1e-14 * scale);
    while (norm2_at(lo) > 1.0) lo -= (q_min - lo);  // expand until ||u|| <= 1
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (norm2_at(mid) > 1.0)
        hi = mid;
      else
        lo = mid;
      if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
    }
    const double nu = 0.5 * (lo + hi);
    for (Eigen::Index i = 0; i < m; ++i) u_coords(i) = c(i) / (q(i) - nu);
    const double nrm = u_coords.norm();
    if (nrm > 0.0) u_coords /= nrm;
  }
  out.u = es.eigenvectors() * u_coords;
  const double quad = (out.u.adjoint() * (es.eigenvectors() * q.asDiagonal() *
                                          es.eigenvectors().adjoint()) * out.u)
                          .real()(0);
  out.value = quad - 2.0 * (beta.adjoint() * out.u).real()(0);
  return out;
}

}  // namespace detail

/// Beamformer power minimization toward the eavesdropper under a fixed
/// receiver alignment fraction z: splits omega into the h(v) direction and
/// its orthogonal complement and solves the sphere-constrained quadratic on
/// the complement.
inline PhiResult solve_phi(const PhaseVector& phases, double z, const ChannelRealization& ch) {
  if (z < 0.0 || z > 1.0) throw std::invalid_argument("solve_phi: z must lie in [0,1]");
  const int n_t = static_cast<int>(ch.g.rows());
  const CMat a = hermitize(ch.g * ch.g.adjoint());
  const CVec h = effective_receive_vector(phases, ch);
  const double h_norm = h.norm();

  PhiResult res;
  res.z = z;
  if (h_norm < 1e-14) {  // constraint is vacuous
    Eigen::SelfAdjointEigenSolver<CMat> es(a);
    res.omega = es.eigenvectors().col(0);
    res.value = es.eigenvalues()(0);
    res.constraint_active = false;
    return res;
  }
  const CVec h_unit = h / h_norm;
  const double along = (h_unit.adjoint() * a * h_unit).real()(0);
  if (n_t == 1 || z >= 1.0 - 1e-15) {
    res.omega = h_unit;
    res.value = along;
    return res;
  }

  // Orthonormal basis of the complement of h_unit from a full QR.
  Eigen::HouseholderQR<CMat> qr(h_unit);
  const CMat q_full = qr.householderQ() * CMat::Identity(n_t, n_t);
  const CMat u_basis = q_full.rightCols(n_t - 1);

  const CMat b_restricted = hermitize(u_basis.adjoint() * a * u_basis);
  const CVec b_cross = u_basis.adjoint() * (a * h_unit);
  Eigen::SelfAdjointEigenSolver<CMat> es((1.0 - z) * b_restricted);
  const CVec beta = std::sqrt(z * (1.0 - z)) * b_cross;
  const detail::SphereQuadratic sq = detail::min_quadratic_on_sphere(es, beta);

  // The optimal cross-term phase makes the coupling negative.
  res.omega = -std::sqrt(z) * h_unit + std::sqrt(1.0 - z) * (u_basis * sq.u);
  res.value = z * along + sq.value;
  return res;
}

/// Exact (quadrature-based) reduced secrecy objective in (v, z), bits.
inline double objective_c1_vz(const PhaseVector& phases, double z, const ChannelRealization& ch) {
  const CVec h = effective_receive_vector(phases, ch);
  const int n_e = static_cast<int>(ch.h_e.cols());
  const double phi = solve_phi(phases, z, ch).value;
  return std::log1p(ch.rho_r * z * h.squaredNorm()) / kLn2 -
         f1_bits(ch.rho_e * std::max(phi, 0.0), n_e);
}

/// Safeguarded Newton search on z in [0,1]: a coarse scan locates the basin,
/// Newton with central differences polishes it, golden-section is the
/// fallback whenever curvature or the step misbehave.
inline double newton_z(const PhaseVector& phases, const ChannelRealization& ch, double z0,
                       double tol = 1e-8) {
  if (z0 < 0.0 || z0 > 1.0) throw std::invalid_argument("newton_z: z0 must lie in [0,1]");
  const auto f = [&](double z) { return objective_c1_vz(phases, z, ch); };
  const double h = 1e-4;

  double best_z = z0;
  double best_f = f(z0);
  constexpr int kScan = 65;
  for (int i = 0; i < kScan; ++i) {
    const double z = static_cast<double>(i) / (kScan - 1);
    const double val = f(z);
    if (val > best_f) {
      best_f = val;
      best_z = z;
    }
  }

  const auto golden = [&](double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-8) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = f(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = f(x1);
      }
    }
    return 0.5 * (a + b);
  };

  double z = best_z;
  bool newton_ok = false;
  for (int it = 0; it < 50; ++it) {
    const double zl = std::max(0.0, z - h);
    const double zr = std::min(1.0, z + h);
    const double fl = f(zl), fc = f(z), fr = f(zr);
    const double d1 = (fr - fl) / (zr - zl);
    const double d2 = (fr - 2.0 * fc + fl) / (0.5 * (zr - zl) * 0.5 * (zr - zl));
    const double proj_d1 = (z <= 0.0 && d1 < 0.0) || (z >= 1.0 && d1 > 0.0) ? 0.0 : d1;
    if (std::abs(proj_d1) < tol) {
      newton_ok = true;
      break;
    }
    if (d2 >= -1e-14) break;  // locally non-concave, fall back
    const double step = d1 / d2;
    const double z_new = z - step;
    if (z_new < 0.0 || z_new > 1.0) break;
    if (std::abs(z_new - z) < 1e-12) {
      newton_ok = true;
      z = z_new;
      break;
    }
    z = z_new;
  }
  if (!newton_ok) {
    const double width = 1.0 / (kScan - 1);
    z = golden(std::max(0.0, best_z - width), std::min(1.0, best_z + width));
  }
  return f(z) >= best_f ? z : best_z;
}

/// Alternating rank-one beamforming and phase alignment for the exact
/// known-receiver objective. Each round updates (z, omega) for the current
/// phases and then re-aligns the phases to the new beamformer.
inline AltOptReport alt_opt_c1(const ChannelRealization& ch, const PhaseVector& v0,
                               int max_iters = 50, double tol = 1e-7) {
  if (v0.max_modulus_error() > 1e-9)
    throw std::invalid_argument("alt_opt_c1: v0 must be unit-modulus");
  AltOptReport report;
  report.v = v0;
  double z = 0.5;
  double prev = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < max_iters; ++t) {
    z = newton_z(report.v, ch, z);
    const PhiResult phi = solve_phi(report.v, z, ch);
    report.omega = phi.omega;
    report.z = z;
    const double obj = objective_c1_vz(report.v, z, ch);
    report.objective_trace.push_back(obj);
    report.iterations = t + 1;
    report.v = closed_form_phase(report.omega, ch);
    if (obj - prev < tol && t > 0) break;
    prev = obj;
  }
  return report;
}

/// Single-antenna-eavesdropper AN gain term g(t_hat); nonpositive slope in
/// t_hat certifies that injecting AN cannot help.
inline double an_gain_ne1(double a, double b, double t_hat) {
  if (a < 0.0) throw std::invalid_argument("an_gain_ne1: a must be nonnegative");
  if (!(b > 0.0) || b > 1.0) throw std::invalid_argument("an_gain_ne1: b must lie in (0,1]");
  if (t_hat < 0.0) throw std::invalid_argument("an_gain_ne1: t_hat must be nonnegative");
  return std::log1p(a / (b + t_hat)) - std::log1p(a / (1.0 + t_hat));
}

/// Monte Carlo estimate of the stationarity matrix whose positive eigenspace
/// carries the optimal message covariance; nats scale.
inline CMat kkt_matrix_a(const CMat& sigma_s, const PhaseVector& phases,
                         const ChannelRealization& ch, int n_mc_samples, Rng& rng) {
  if (n_mc_samples < 1) throw std::invalid_argument("kkt_matrix_a: need samples");
  require_hermitian(sigma_s, 1e-8, "kkt_matrix_a");
  const CVec a = effective_receive_vector(phases, ch);
  const Eigen::Index n_i = ch.g.cols();
  const Eigen::Index n_e = ch.h_e.cols();
  const int n_t = static_cast<int>(ch.g.rows());
  CMat eve = CMat::Zero(n_t, n_t);
  for (int i = 0; i < n_mc_samples; ++i) {
    const CMat s_eff = ch.g * rng.cnormal_matrix(n_i, n_e);
    eve += eve_grad_nats(sigma_s, s_eff, ch.rho_e);
  }
  eve /= static_cast<double>(n_mc_samples);
  return hermitize(recv_grad_nats(sigma_s, a, ch.rho_r) - eve);
}

}  // namespace lisec
