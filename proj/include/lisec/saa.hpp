#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lisec/objective.hpp"
#include "lisec/phase_opt.hpp"
#include "lisec/psd_geometry.hpp"

namespace lisec {

struct InnerSolverConfig {
  int max_iterations = 500;
  double tol = 1e-8;  ///< relative objective tolerance
};

struct SaaConfig {
  int k_samples = 1000;
  double l0 = 0.0;  ///< initial adaptive constant; <= 0 derives it from the per-sample bounds
  int max_outer = 50;
  double objective_tol = 1e-6;  ///< relative gain threshold, 3 consecutive hits stop
  InnerSolverConfig inner;
};

struct SaaState {
  CovariancePair pair;
  PhaseVector v;
  double l_t = 0.0;
  double objective = 0.0;  ///< sample-average value at the returned point, bits
  SolverTrace trace;
  int outer_iterations = 0;
  bool converged = false;
  SampleBatch batch;  ///< the fixed sample set the run optimized over
};

/// Linearized sample-average model around an anchor: the concave receiver
/// term is kept exact, the eavesdropper terms are replaced by tangents, and
/// the non-concave AN log term by a tangent plus an L_t proximal quadratic.
struct SurrogateModel {
  CMat a_s;  ///< nats-scale linear coefficient for sigma_s
  CMat a_z;
  CMat anchor_z;
  double l_t = 0.0;
  double rho_r = 0.0;
  std::vector<CVec> recv_vectors;  ///< one entry unless the receiver is statistical

  double value(const CovariancePair& pair) const {
    const CMat sum = pair.sigma_s + pair.sigma_z;
    double fr = 0.0;
    for (const CVec& a : recv_vectors)
      fr += std::log1p(rho_r * (a.adjoint() * sum * a).real()(0));
    fr /= static_cast<double>(recv_vectors.size());
    const double nats = -fr + real_inner(a_s, pair.sigma_s) + real_inner(a_z, pair.sigma_z) +
                        l_t * (pair.sigma_z - anchor_z).squaredNorm();
    return nats / kLn2;
  }

  GradientPair gradient(const CovariancePair& pair) const {
    const CMat sum = pair.sigma_s + pair.sigma_z;
    const int n_t = static_cast<int>(sum.rows());
    CMat mr = CMat::Zero(n_t, n_t);
    for (const CVec& a : recv_vectors) mr += recv_grad_nats(sum, a, rho_r);
    mr /= static_cast<double>(recv_vectors.size());
    const double scale = 1.0 / (2.0 * kLn2);
    GradientPair g;
    g.g_s = hermitize(scale * (a_s - mr));
    g.g_z = hermitize(scale * (a_z - mr) + (l_t / kLn2) * (pair.sigma_z - anchor_z));
    return g;
  }

  /// Curvature bound for the gradient map; step sizes start at its inverse.
  double curvature_bound() const {
    double a4 = 0.0;
    for (const CVec& a : recv_vectors) a4 += std::pow(a.squaredNorm(), 2);
    a4 /= static_cast<double>(recv_vectors.size());
    return (l_t + rho_r * rho_r * a4) / kLn2;
  }

  /// The receiver log term bounds the domain; extrapolated points must keep
  /// its argument safely positive.
  bool domain_ok(const CovariancePair& pair) const {
    const CMat sum = pair.sigma_s + pair.sigma_z;
    for (const CVec& a : recv_vectors)
      if (1.0 + rho_r * (a.adjoint() * sum * a).real()(0) < 0.05) return false;
    return true;
  }
};

inline SurrogateModel build_surrogate(const CovariancePair& anchor, const SampleBatch& batch,
                                      const PhaseVector& phases, const ChannelRealization& ch,
                                      double l_t) {
  if (batch.size() == 0) throw std::invalid_argument("build_surrogate: empty batch");
  const int n_t = static_cast<int>(ch.g.rows());
  const CMat sum = anchor.sigma_s + anchor.sigma_z;
  SurrogateModel m;
  m.l_t = l_t;
  m.rho_r = ch.rho_r;
  m.anchor_z = anchor.sigma_z;
  m.recv_vectors = detail::batch_receive_vectors(batch, phases, ch);

  CMat eve_sum = CMat::Zero(n_t, n_t);
  CMat eve_z = CMat::Zero(n_t, n_t);
  for (const CMat& s : batch.s_eff) {
    eve_sum += eve_grad_nats(sum, s, ch.rho_e);
    eve_z += eve_grad_nats(anchor.sigma_z, s, ch.rho_e);
  }
  const double k = static_cast<double>(batch.size());
  eve_sum /= k;
  eve_z /= k;

  CMat mr_z = CMat::Zero(n_t, n_t);
  for (const CVec& a : m.recv_vectors) mr_z += recv_grad_nats(anchor.sigma_z, a, ch.rho_r);
  mr_z /= static_cast<double>(m.recv_vectors.size());

  m.a_s = hermitize(eve_sum);
  m.a_z = hermitize(mr_z + eve_sum - eve_z);
  return m;
}

/// Value of the convex subproblem objective at `pair` for the model anchored
/// at `anchor`, bits.
inline double surrogate_objective(const CovariancePair& pair, const CovariancePair& anchor,
                                  const EveSampleSet& samples, const PhaseVector& phases,
                                  const ChannelRealization& ch, double l_t) {
  const SampleBatch batch = batch_from_samples(ch, samples, ObjectiveId::C3);
  return build_surrogate(anchor, batch, phases, ch, l_t).value(pair);
}

namespace detail {

struct P42Result {
  CovariancePair pair;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated projected gradient on the convex surrogate, with monitored
/// descent: momentum restarts whenever a step fails to decrease the
/// objective, and the step size backtracks if even the plain step fails.
inline P42Result solve_p42_impl(const SurrogateModel& model, const CovariancePair& anchor,
                                const InnerSolverConfig& cfg, bool pin_an) {
  const int n_t = static_cast<int>(anchor.sigma_s.rows());
  const auto project = [&](const CMat& ps, const CMat& pz) {
    return project_pair_onto_x2(ps, pin_an ? CMat(CMat::Zero(n_t, n_t)) : pz).first;
  };
  const auto step_from = [&](const CovariancePair& point, double r) {
    GradientPair g = model.gradient(point);
    if (pin_an) g.g_z.setZero();
    return project(point.sigma_s - r * g.g_s, point.sigma_z - r * g.g_z);
  };

  double r = 1.0 / std::max(model.curvature_bound(), 1e-12);
  P42Result res;
  res.pair = anchor;
  res.objective = model.value(anchor);
  CovariancePair x = anchor;
  CovariancePair x_prev = anchor;
  double obj = res.objective;
  double momentum = 1.0;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double w = (momentum - 1.0) / momentum_next;
    CovariancePair y{x.sigma_s + w * (x.sigma_s - x_prev.sigma_s),
                     x.sigma_z + w * (x.sigma_z - x_prev.sigma_z)};
    if (!model.domain_ok(y)) y = x;
    CovariancePair cand = step_from(y, r);
    double cand_obj = model.value(cand);
    if (cand_obj > obj) {
      // restart without momentum; backtrack the step until it descends
      momentum = 1.0;
      cand = step_from(x, r);
      cand_obj = model.value(cand);
      int guard = 0;
      while (cand_obj > obj && guard++ < 60) {
        r *= 0.5;
        cand = step_from(x, r);
        cand_obj = model.value(cand);
      }
      if (cand_obj > obj) break;  // numerically at the floor
    } else {
      momentum = momentum_next;
    }
    x_prev = x;
    x = cand;
    res.iterations = it + 1;
    const bool small = std::abs(obj - cand_obj) <= cfg.tol * std::max(1.0, std::abs(obj));
    obj = cand_obj;
    if (obj < res.objective) {
      res.objective = obj;
      res.pair = x;
    }
    if (small) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace detail

/// Solves the convex per-iteration subproblem to the inner tolerance.
inline CovariancePair solve_p42(const CovariancePair& anchor, const EveSampleSet& samples,
                                const PhaseVector& phases, const ChannelRealization& ch,
                                double l_t, const InnerSolverConfig& cfg = {},
                                bool pin_an = false) {
  if (!(l_t > 0.0)) throw std::invalid_argument("solve_p42: l_t must be positive");
  const SampleBatch batch = batch_from_samples(ch, samples, ObjectiveId::C3);
  const SurrogateModel model = build_surrogate(anchor, batch, phases, ch, l_t);
  return detail::solve_p42_impl(model, anchor, cfg, pin_an).pair;
}

/// Sample-average approximation solver: one fixed sample set, majorized
/// covariance updates with an adaptive-constant line search, alternated with
/// the fractional phase optimization.
inline SaaState saa_optimize(const SaaConfig& config, ObjectiveId objective,
                             const ChannelRealization& ch, const PhaseVector& v0,
                             const CovariancePair& pair0, Rng& rng) {
  if (config.k_samples < 1 || config.max_outer < 1 || !(config.objective_tol > 0.0))
    throw std::invalid_argument("saa_optimize: bad configuration");
  if (!pair0.is_feasible(1e-8, 1e-8, 1e-8))
    throw std::invalid_argument("saa_optimize: infeasible initial point");
  const bool an = objective_uses_an(objective);
  const bool phases_matter = !objective_hr_statistical(objective);

  const SampleBatch batch = draw_batch(ch, objective, config.k_samples, rng);
  double l_t = config.l0;
  if (!(l_t > 0.0)) {
    std::vector<double> bounds;
    bounds.reserve(batch.size());
    for (const CMat& s : batch.s_eff) {
      const double b = ch.rho_e * static_cast<double>(s.cols()) * (s * s.adjoint()).norm();
      bounds.push_back(b * b);
    }
    l_t = std::min(pairwise_mean(bounds), 1e6);
    if (!(l_t > 0.0)) l_t = 1.0;
  }

  SaaState state;
  state.pair = pair0;
  if (!an) state.pair.sigma_z.setZero();
  state.v = v0;
  state.objective = batch_objective(objective, state.pair, state.v, ch, batch);
  state.trace.rows.push_back({0, state.objective, l_t, 0, 0.0, 0.0});

  int consecutive_small = 0;
  for (int t = 1; t <= config.max_outer; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    l_t /= 4.0;
    detail::P42Result cand;
    int doublings = 0;
    for (; doublings < 64; ++doublings) {
      l_t *= 2.0;
      const SurrogateModel model = build_surrogate(state.pair, batch, state.v, ch, l_t);
      cand = detail::solve_p42_impl(model, state.pair, config.inner, !an);
      const double cand_obj = batch_objective(objective, cand.pair, state.v, ch, batch);
      if (cand_obj >= state.objective - 1e-12 * std::max(1.0, std::abs(state.objective))) break;
    }
    state.pair = cand.pair;
    if (phases_matter) {
      PhaseOptReport phase = optimize_phases(state.pair, ch, state.v);
      state.v = phase.v;
    }
    const double new_obj = batch_objective(objective, state.pair, state.v, ch, batch);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    state.trace.rows.push_back({t, new_obj, l_t, cand.iterations, 0.0, wall_ms});
    const double gain = new_obj - state.objective;
    state.objective = new_obj;
    state.outer_iterations = t;
    if (gain < config.objective_tol * std::max(1.0, std::abs(new_obj)))
      ++consecutive_small;
    else
      consecutive_small = 0;
    if (consecutive_small >= 3) {
      state.converged = true;
      break;
    }
  }
  state.l_t = l_t;
  state.batch = batch;
  return state;
}

}  // namespace lisec
