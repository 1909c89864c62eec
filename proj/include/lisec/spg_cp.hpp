#pragma once

#include <chrono>
#include <cmath>
#include <functional>

#include "lisec/objective.hpp"
#include "lisec/phase_opt.hpp"
#include "lisec/psd_geometry.hpp"

namespace lisec {

struct SpgConfig {
  double alpha = 1.3;  ///< batch growth exponent, must exceed 1
  int n_iters = 60;
  double r = 0.0;  ///< step size; <= 0 selects 1/L after estimation
  int l_est_trials = 8;
  std::uint64_t seed = 1;
  ObjectiveId objective = ObjectiveId::C3;
  int validation_samples = 0;  ///< per-iteration monitoring set size; 0 disables
};

struct SpgState {
  CovariancePair pair;
  PhaseVector v;
  int t = 1;  ///< next iteration index
  std::vector<double> gap_norms;
  std::vector<RateEstimate> objective_estimates;
  double r = 0.0;
  double l_est = 0.0;
  SolverTrace trace;
};

/// Smallest integer n with n >= t^alpha. An exact integer power such as
/// 4^1.5 must not be bumped up by rounding noise in pow.
inline long long batch_size(long long t, double alpha) {
  if (t < 1) throw std::invalid_argument("batch_size: t must be >= 1");
  if (!(alpha > 1.0)) throw std::invalid_argument("batch_size: alpha must exceed 1");
  const double p = std::pow(static_cast<double>(t), alpha);
  const double nearest = std::nearbyint(p);
  if (std::abs(p - nearest) <= 1e-9 * std::max(1.0, std::abs(p)))
    return static_cast<long long>(nearest);
  return static_cast<long long>(std::ceil(p));
}

/// Max finite-difference curvature of a gradient map over sampled points,
/// inflated by a safety factor of two.
inline double estimate_curvature(const std::vector<CovariancePair>& points,
                                 const std::function<GradientPair(const CovariancePair&)>& grad) {
  if (points.size() < 2) throw std::invalid_argument("estimate_curvature: need >= 2 points");
  std::vector<GradientPair> grads;
  grads.reserve(points.size());
  for (const CovariancePair& p : points) grads.push_back(grad(p));
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = std::sqrt((points[i].sigma_s - points[j].sigma_s).squaredNorm() +
                                  (points[i].sigma_z - points[j].sigma_z).squaredNorm());
      if (dx < 1e-12) continue;
      const double dg = std::sqrt((grads[i].g_s - grads[j].g_s).squaredNorm() +
                                  (grads[i].g_z - grads[j].g_z).squaredNorm());
      worst = std::max(worst, dg / dx);
    }
  }
  return std::max(2.0 * worst, 1e-12);
}

inline CovariancePair random_feasible_pair(int n_t, Rng& rng, bool an = true) {
  const auto random_psd = [&](double mass) {
    CMat x = rng.cnormal_matrix(n_t, n_t);
    CMat p = hermitize(x * x.adjoint());
    return CMat(mass * p / std::max(p.trace().real(), 1e-12));
  };
  const double total = 0.9 * rng.uniform();
  const double split = an ? rng.uniform() : 1.0;
  CovariancePair pair{random_psd(total * split), CMat::Zero(n_t, n_t)};
  if (an) pair.sigma_z = random_psd(total * (1.0 - split));
  return pair;
}

/// Trial-point estimate of the gradient Lipschitz constant of the secrecy
/// objective; the probe batch is shared across trial points.
inline double estimate_l(const ChannelRealization& ch, const PhaseVector& phases, int trials,
                         Rng& rng, ObjectiveId objective = ObjectiveId::C3) {
  if (trials < 2) throw std::invalid_argument("estimate_l: need trials >= 2");
  const int n_t = static_cast<int>(ch.g.rows());
  const SampleBatch probe = draw_batch(ch, objective, 64, rng);
  std::vector<CovariancePair> points;
  points.reserve(static_cast<std::size_t>(trials));
  for (int i = 0; i < trials; ++i)
    points.push_back(random_feasible_pair(n_t, rng, objective_uses_an(objective)));
  return estimate_curvature(points, [&](const CovariancePair& p) {
    return batch_gradient(objective, p, phases, ch, probe);
  });
}

/// Stochastic gradients of the negated objective, the descent direction fed
/// to the proximal update.
inline GradientPair stochastic_grads(const CovariancePair& pair, const PhaseVector& phases,
                                     const ChannelRealization& ch, const SampleBatch& batch,
                                     ObjectiveId objective = ObjectiveId::C3) {
  GradientPair g = batch_gradient(objective, pair, phases, ch, batch);
  g.g_s = -g.g_s;
  g.g_z = -g.g_z;
  return g;
}

/// One iteration: fresh growing batch, proximal covariance update, phase
/// refresh, gap bookkeeping.
inline void spg_step(const SpgConfig& config, SpgState& state, const ChannelRealization& ch,
                     Rng& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  const long long b = batch_size(state.t, config.alpha);
  const SampleBatch batch = draw_batch(ch, config.objective, static_cast<int>(b), rng);
  const GradientPair grads = stochastic_grads(state.pair, state.v, ch, batch, config.objective);
  const ProxResult prox = prox_pair(state.pair, grads, state.r);
  state.pair = prox.pair;
  state.gap_norms.push_back(prox.gap_norm());
  int inner = 0;
  if (!objective_hr_statistical(config.objective)) {
    PhaseOptReport phase = optimize_phases(state.pair, ch, state.v);
    state.v = phase.v;
    inner = phase.inner_iterations.empty() ? 0 : phase.inner_iterations.back();
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  state.trace.rows.push_back(
      {state.t, 0.0, static_cast<double>(b), inner, prox.gap_norm(), wall_ms});
  ++state.t;
}

inline SpgState spg_optimize(const SpgConfig& config, const ChannelRealization& ch,
                             const CovariancePair& pair0, const PhaseVector& v0) {
  if (!(config.alpha > 1.0)) throw std::invalid_argument("spg_optimize: alpha must exceed 1");
  if (config.n_iters < 1) throw std::invalid_argument("spg_optimize: n_iters must be >= 1");
  Rng rng(config.seed);
  SpgState state;
  state.pair = pair0;
  if (!objective_uses_an(config.objective)) state.pair.sigma_z.setZero();
  state.v = v0;
  state.l_est = estimate_l(ch, v0, config.l_est_trials, rng, config.objective);
  state.r = config.r > 0.0 ? config.r : 1.0 / state.l_est;

  const auto validate = [&](SpgState& s) {
    // Identical reseeding keeps the monitoring set fixed across iterations.
    Rng vrng(mix_seed(config.seed, 0x5A11DA7Eull));
    s.objective_estimates.push_back(secrecy_rate(config.objective, s.pair, s.v, ch,
                                                 config.validation_samples, vrng));
    s.trace.rows.back().objective = s.objective_estimates.back().value;
  };

  for (int t = 1; t <= config.n_iters; ++t) {
    spg_step(config, state, ch, rng);
    if (config.validation_samples > 0) validate(state);
  }
  return state;
}

}  // namespace lisec
