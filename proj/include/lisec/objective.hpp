#pragma once

#include <vector>

#include "lisec/rates.hpp"

namespace lisec {

struct SolverTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double step_or_l = 0.0;  ///< SAA: adaptive L_t; SPG: batch size
  int inner_iterations = 0;
  double gap_norm = 0.0;
  double wall_ms = 0.0;
};

struct SolverTrace {
  std::vector<SolverTraceRow> rows;
};

/// A batch of channel samples with the AP-side effective eavesdropper
/// channels precomputed. For the statistical-receiver objectives each
/// eavesdropper draw is paired with a fresh receiver draw.
struct SampleBatch {
  std::vector<CMat> s_eff;     ///< G * H_e^i
  std::vector<CVec> hr_draws;  ///< only for C2/C4
  bool hr_statistical = false;

  std::size_t size() const { return s_eff.size(); }
};

inline SampleBatch draw_batch(const ChannelRealization& ch, ObjectiveId objective, int count,
                              Rng& rng) {
  if (count < 1) throw std::invalid_argument("draw_batch: need count >= 1");
  SampleBatch batch;
  batch.hr_statistical = objective_hr_statistical(objective);
  batch.s_eff.reserve(static_cast<std::size_t>(count));
  const Eigen::Index n_i = ch.g.cols();
  const Eigen::Index n_e = ch.h_e.cols();
  for (int i = 0; i < count; ++i) {
    batch.s_eff.push_back(ch.g * rng.cnormal_matrix(n_i, n_e));
    if (batch.hr_statistical) batch.hr_draws.push_back(rng.cnormal_vector(n_i));
  }
  return batch;
}

inline SampleBatch batch_from_samples(const ChannelRealization& ch, const EveSampleSet& samples,
                                      ObjectiveId objective) {
  SampleBatch batch;
  batch.hr_statistical = objective_hr_statistical(objective);
  batch.s_eff.reserve(samples.samples.size());
  for (const CMat& h_e : samples.samples) batch.s_eff.push_back(ch.g * h_e);
  if (batch.hr_statistical) {
    Rng rng(mix_seed(samples.seed, 0x48525F44ull));  // paired receiver draws
    for (std::size_t i = 0; i < samples.samples.size(); ++i)
      batch.hr_draws.push_back(rng.cnormal_vector(ch.g.cols()));
  }
  return batch;
}

namespace detail {

/// Per-sample receive vectors at the AP. For the known-CSI objectives the
/// phase shifts enter here; for statistical receivers they are dropped
/// (they do not affect the distribution).
inline std::vector<CVec> batch_receive_vectors(const SampleBatch& batch,
                                               const PhaseVector& phases,
                                               const ChannelRealization& ch) {
  std::vector<CVec> as;
  if (batch.hr_statistical) {
    as.reserve(batch.hr_draws.size());
    for (const CVec& hr : batch.hr_draws) as.push_back(ch.g * hr);
  } else {
    as.push_back(effective_receive_vector(phases, ch));
  }
  return as;
}

inline double log_term_bits(const CVec& a, const CMat& x, double rho_r) {
  return std::log1p(rho_r * (a.adjoint() * x * a).real()(0)) / kLn2;
}

}  // namespace detail

/// Sample-average objective in bits for any of the four modes. Reduces to
/// c_bar_3 for C3 and to the C1 average when sigma_z = 0.
inline double batch_objective(ObjectiveId objective, const CovariancePair& pair,
                              const PhaseVector& phases, const ChannelRealization& ch,
                              const SampleBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("batch_objective: empty batch");
  const bool an = objective_uses_an(objective);
  const CMat sum = pair.sigma_s + pair.sigma_z;
  const std::vector<CVec> as = detail::batch_receive_vectors(batch, phases, ch);
  std::vector<double> vals;
  vals.reserve(batch.size());
  double recv_fixed = 0.0;
  if (!batch.hr_statistical)
    recv_fixed = detail::log_term_bits(as[0], sum, ch.rho_r) -
                 (an ? detail::log_term_bits(as[0], pair.sigma_z, ch.rho_r) : 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double val = recv_fixed;
    if (batch.hr_statistical)
      val = detail::log_term_bits(as[i], sum, ch.rho_r) -
            (an ? detail::log_term_bits(as[i], pair.sigma_z, ch.rho_r) : 0.0);
    val -= eve_logdet_eff(sum, batch.s_eff[i], ch.rho_e);
    if (an) val += eve_logdet_eff(pair.sigma_z, batch.s_eff[i], ch.rho_e);
    vals.push_back(val);
  }
  return pairwise_mean(vals);
}

/// Conjugate-convention gradient of the batch objective, bits.
inline GradientPair batch_gradient(ObjectiveId objective, const CovariancePair& pair,
                                   const PhaseVector& phases, const ChannelRealization& ch,
                                   const SampleBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("batch_gradient: empty batch");
  const bool an = objective_uses_an(objective);
  const CMat sum = pair.sigma_s + pair.sigma_z;
  const int n_t = static_cast<int>(ch.g.rows());
  const std::vector<CVec> as = detail::batch_receive_vectors(batch, phases, ch);
  const double k = static_cast<double>(batch.size());

  CMat recv_sum = CMat::Zero(n_t, n_t);
  CMat recv_z = CMat::Zero(n_t, n_t);
  if (batch.hr_statistical) {
    for (const CVec& a : as) {
      recv_sum += recv_grad_nats(sum, a, ch.rho_r);
      if (an) recv_z += recv_grad_nats(pair.sigma_z, a, ch.rho_r);
    }
    recv_sum /= k;
    recv_z /= k;
  } else {
    recv_sum = recv_grad_nats(sum, as[0], ch.rho_r);
    if (an) recv_z = recv_grad_nats(pair.sigma_z, as[0], ch.rho_r);
  }

  CMat eve_sum = CMat::Zero(n_t, n_t);
  CMat eve_z = CMat::Zero(n_t, n_t);
  for (const CMat& s : batch.s_eff) {
    eve_sum += eve_grad_nats(sum, s, ch.rho_e);
    if (an) eve_z += eve_grad_nats(pair.sigma_z, s, ch.rho_e);
  }
  eve_sum /= k;
  eve_z /= k;

  const double scale = 1.0 / (2.0 * kLn2);
  GradientPair grad;
  grad.g_s = hermitize(scale * (recv_sum - eve_sum));
  grad.g_z = an ? CMat(hermitize(scale * (recv_sum - recv_z - eve_sum + eve_z)))
                : CMat(CMat::Zero(n_t, n_t));
  return grad;
}

}  // namespace lisec
