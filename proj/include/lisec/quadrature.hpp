#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>

#include "lisec/common.hpp"

namespace lisec {

struct QuadratureRule {
  RVec nodes;
  RVec weights;
};

/// Gauss-Laguerre rule for integrals against e^{-x} on [0, inf),
/// built from the Jacobi matrix (Golub-Welsch).
inline QuadratureRule gauss_laguerre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_laguerre: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 0; k < order; ++k) {
    jacobi(k, k) = 2.0 * k + 1.0;
    if (k + 1 < order) {
      jacobi(k, k + 1) = k + 1.0;
      jacobi(k + 1, k) = k + 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(order);
  for (int k = 0; k < order; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.weights(k) = v0 * v0;  // total mass of e^{-x} is 1
  }
  return rule;
}

inline constexpr int kF1QuadratureOrder = 96;

inline const QuadratureRule& f1_rule() {
  static const QuadratureRule rule = gauss_laguerre(kF1QuadratureOrder);
  return rule;
}

/// log(1+tx) evaluated so that huge tx does not lose the small correction.
inline double log1p_product(double t, double x) {
  const double p = t * x;
  if (p > 1e12) return std::log(t) + std::log(x) + std::log1p(1.0 / p);
  return std::log1p(p);
}

struct F1Result {
  double value = 0.0;  ///< nats
  double d1 = 0.0;
  double d2 = 0.0;
};

/// F1(t, n1) = E log(1 + t * Gamma(n1)) for a unit-rate Gamma variable:
/// the expected log-term when t appears as an n1-fold eigenvalue.
/// Returns the value and its first two t-derivatives, all in nats.
inline F1Result f1_with_derivs(double t, int n1) {
  if (t < 0.0) throw std::invalid_argument("f1_with_derivs: t must be nonnegative");
  if (n1 < 1) throw std::invalid_argument("f1_with_derivs: n1 must be >= 1");
  const QuadratureRule& rule = f1_rule();
  const double log_gamma_n1 = std::lgamma(static_cast<double>(n1));
  F1Result out;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes(k);
    const double w = rule.weights(k);
    if (w == 0.0) continue;
    const double logx = std::log(x);
    // x^{n1-1}/(n1-1)!, x^{n1}/(n1-1)!, x^{n1+1}/(n1-1)!
    const double p0 = std::exp((n1 - 1) * logx - log_gamma_n1);
    const double p1 = p0 * x;
    const double p2 = p1 * x;
    const double denom = 1.0 + t * x;
    if (t > 0.0) out.value += w * p0 * log1p_product(t, x);
    out.d1 += w * p1 / denom;
    out.d2 -= w * p2 / (denom * denom);
  }
  return out;
}

inline double f1_bits(double t, int n1) { return f1_with_derivs(t, n1).value / kLn2; }

}  // namespace lisec
