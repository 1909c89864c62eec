#include <doctest.h>

#include "lisec/spg_cp.hpp"
#include "oracles.hpp"

using namespace lisec;

namespace {

ChannelRealization spg_channel(Rng& rng, int n_t = 3, int n_i = 6, int n_e = 2,
                               double rho_r = 3.0, double rho_e = 0.8) {
  ChannelRealization ch;
  ch.g = rng.cnormal_matrix(n_t, n_i);
  ch.h_r = rng.cnormal_vector(n_i);
  ch.h_e = rng.cnormal_matrix(n_i, n_e);
  ch.rho_r = rho_r;
  ch.rho_e = rho_e;
  return ch;
}

}  // namespace

TEST_SUITE("spg_cp") {
  TEST_CASE("batch sizes") {
    CHECK(batch_size(1, 1.5) == 1);
    CHECK(batch_size(1, 7.3) == 1);
    CHECK(batch_size(2, 1.5) == 3);   // 2^1.5 ~ 2.83
    CHECK(batch_size(4, 1.5) == 8);   // exact integer power stays exact
    CHECK(batch_size(9, 1.5) == 27);
    CHECK(batch_size(100, 2.0) == 10000);
    CHECK_THROWS_AS(batch_size(3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(batch_size(0, 1.5), std::invalid_argument);
  }

  TEST_CASE("total sample bookkeeping") {
    long long total = 0;
    for (long long t = 1; t <= 20; ++t) total += batch_size(t, 1.3);
    long long again = 0;
    for (long long t = 1; t <= 20; ++t) again += batch_size(t, 1.3);
    CHECK(total == again);
    CHECK(total >= 20);        // at least one sample per iteration
    CHECK(total >= batch_size(20, 1.3));
  }

  TEST_CASE("curvature estimator recovers a known quadratic curvature") {
    Rng rng(51);
    const double l_t = 3.7;
    const CMat target = oracle::random_psd(3, rng, 0.5);
    // the objective only depends on sigma_z, so trial points live in that slice
    std::vector<CovariancePair> points;
    for (int i = 0; i < 8; ++i)
      points.push_back({CMat::Zero(3, 3), oracle::random_psd(3, rng, 0.9 * rng.uniform())});
    // halved-convention gradient of l_t || sigma_z - A ||^2
    const double est = estimate_curvature(points, [&](const CovariancePair& p) {
      return GradientPair{CMat::Zero(3, 3), l_t * (p.sigma_z - target)};
    });
    const double ratio = est / (2.0 * l_t);
    CHECK(ratio >= 1.0 - 1e-9);
    CHECK(ratio <= 2.5);
  }

  TEST_CASE("estimated L is insensitive to the phase configuration") {
    Rng crng(52);
    ChannelRealization ch = spg_channel(crng);
    std::vector<double> estimates;
    for (int k = 0; k < 10; ++k) {
      Rng vr(500 + k);
      const PhaseVector v = oracle::random_phases(6, vr);
      Rng er(999);  // same probe batch and trial points for every Theta
      estimates.push_back(estimate_l(ch, v, 6, er));
    }
    const double lo = *std::min_element(estimates.begin(), estimates.end());
    const double hi = *std::max_element(estimates.begin(), estimates.end());
    CHECK(hi / lo < 3.0);
    SUBCASE("global phase leaves the estimate unchanged") {
      Rng vr(501);
      const PhaseVector v = oracle::random_phases(6, vr);
      const PhaseVector shifted{std::polar(1.0, 0.77) * v.v};
      Rng e1(999), e2(999);
      CHECK(estimate_l(ch, v, 6, e1) ==
            doctest::Approx(estimate_l(ch, shifted, 6, e2)).epsilon(1e-10));
    }
  }

  TEST_CASE("stochastic gradients are unbiased") {
    Rng crng(53);
    ChannelRealization ch = spg_channel(crng);
    const PhaseVector v = oracle::random_phases(6, crng);
    const CovariancePair pair = oracle::random_feasible(3, crng, 0.8);

    Rng ref_rng(54);
    const SampleBatch ref = draw_batch(ch, ObjectiveId::C3, 200000, ref_rng);
    const GradientPair ref_g = stochastic_grads(pair, v, ch, ref);

    const int reps = 200, bsize = 50;
    CMat mean_s = CMat::Zero(3, 3);
    std::vector<CMat> draws;
    draws.reserve(reps);
    Rng brng(55);
    for (int rep = 0; rep < reps; ++rep) {
      const SampleBatch b = draw_batch(ch, ObjectiveId::C3, bsize, brng);
      draws.push_back(stochastic_grads(pair, v, ch, b).g_s);
      mean_s += draws.back();
    }
    mean_s /= static_cast<double>(reps);
    CMat var = CMat::Zero(3, 3);
    for (const CMat& d : draws) var += (d - mean_s).cwiseAbs2().cast<cx>();
    var /= static_cast<double>(reps - 1);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double se = std::sqrt(var(i, j).real() / reps) + 1e-12;
        CHECK(std::abs(mean_s(i, j) - ref_g.g_s(i, j)) < 5.0 * se);
      }
    }
  }

  TEST_CASE("stochastic gradient closed form at the origin") {
    Rng crng(56);
    ChannelRealization ch = spg_channel(crng);
    ch.rho_e = 0.0;
    const PhaseVector v = oracle::random_phases(6, crng);
    Rng brng(57);
    const SampleBatch b = draw_batch(ch, ObjectiveId::C3, 5, brng);
    const GradientPair g = stochastic_grads(CovariancePair::zero(3), v, ch, b);
    const CVec a = effective_receive_vector(v, ch);
    const CMat expected = -(ch.rho_r / (2.0 * kLn2)) * (a * a.adjoint());
    CHECK((g.g_s - expected).norm() < 1e-12 * std::max(1.0, expected.norm()));
    CHECK(g.g_z.norm() < 1e-12);
  }

  TEST_CASE("gradient variance scales inversely with the batch size") {
    Rng crng(58);
    ChannelRealization ch = spg_channel(crng);
    const PhaseVector v = oracle::random_phases(6, crng);
    const CovariancePair pair = oracle::random_feasible(3, crng, 0.7);
    const auto scatter = [&](int bsize, std::uint64_t seed) {
      Rng rng(seed);
      std::vector<CMat> draws;
      CMat mean = CMat::Zero(3, 3);
      for (int rep = 0; rep < 200; ++rep) {
        draws.push_back(stochastic_grads(pair, v, ch, draw_batch(ch, ObjectiveId::C3, bsize, rng))
                            .g_s);
        mean += draws.back();
      }
      mean /= 200.0;
      double var = 0.0;
      for (const CMat& d : draws) var += (d - mean).squaredNorm();
      return var / 199.0;
    };
    const double ratio = scatter(100, 61) / scatter(400, 62);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.3);
  }

  TEST_CASE("spg step") {
    SUBCASE("zero gradients fix an interior point") {
      Rng crng(63);
      ChannelRealization ch = spg_channel(crng, 3, 6, 2, 0.0, 0.0);  // constant objective
      SpgConfig cfg;
      cfg.seed = 64;
      SpgState state;
      state.pair = oracle::random_feasible(3, crng, 0.5);
      state.v = PhaseVector::ones(6);
      state.r = 0.5;
      Rng rng(65);
      const CovariancePair before = state.pair;
      spg_step(cfg, state, ch, rng);
      CHECK((state.pair.sigma_s - before.sigma_s).norm() < 1e-12);
      CHECK((state.pair.sigma_z - before.sigma_z).norm() < 1e-12);
      CHECK(state.gap_norms.back() < 1e-12);
    }
    SUBCASE("iterates stay feasible") {
      Rng crng(66);
      ChannelRealization ch = spg_channel(crng);
      SpgConfig cfg;
      SpgState state;
      state.pair = CovariancePair::isotropic(3);
      state.v = PhaseVector::ones(6);
      state.r = 0.3;
      Rng rng(67);
      for (int i = 0; i < 10; ++i) {
        spg_step(cfg, state, ch, rng);
        CHECK(state.pair.is_feasible());
      }
      CHECK(state.t == 11);
    }
  }

  TEST_CASE("a single step usually improves the validation objective") {
    Rng crng(68);
    ChannelRealization ch = spg_channel(crng, 3, 6, 2, 4.0, 1.0);
    int improved = 0;
    const int trials = 50;
    for (int k = 0; k < trials; ++k) {
      Rng prng(700 + k);
      SpgState state;
      state.pair = oracle::random_feasible(3, prng, 0.9);
      state.v = oracle::random_phases(6, prng);
      const PhaseVector v_fixed = state.v;
      Rng lrng(800 + k);
      const double l_est = estimate_l(ch, v_fixed, 6, lrng);
      state.r = 1.0 / l_est;
      const auto validation = [&](const CovariancePair& p) {
        Rng vrng(12345);  // same fixed set for before/after
        return secrecy_rate(ObjectiveId::C3, p, v_fixed, ch, 10000, vrng).value;
      };
      const double before = validation(state.pair);
      SpgConfig cfg;
      cfg.seed = 900 + k;
      Rng srng(900 + k);
      // covariance step only: evaluate at fixed phases to isolate the prox move
      const SampleBatch batch = draw_batch(ch, ObjectiveId::C3, 1, srng);
      const GradientPair g = stochastic_grads(state.pair, state.v, ch, batch);
      state.pair = prox_pair(state.pair, g, state.r).pair;
      if (validation(state.pair) >= before) ++improved;
    }
    CHECK(improved >= 0.8 * trials);
  }

  TEST_CASE("spg_optimize runs exactly N iterations and trends stationary") {
    Rng crng(69);
    ChannelRealization ch = spg_channel(crng, 3, 6, 2, 4.0, 1.0);
    SUBCASE("single iteration bookkeeping") {
      SpgConfig cfg;
      cfg.n_iters = 1;
      cfg.seed = 70;
      const SpgState s = spg_optimize(cfg, ch, CovariancePair::isotropic(3),
                                      PhaseVector::ones(6));
      CHECK(s.gap_norms.size() == 1);
      CHECK(s.t == 2);
      CHECK(s.r > 0.0);
      CHECK(s.r <= 2.0 / s.l_est);
    }
    SUBCASE("alpha must exceed one") {
      SpgConfig cfg;
      cfg.alpha = 1.0;
      CHECK_THROWS_AS(
          spg_optimize(cfg, ch, CovariancePair::isotropic(3), PhaseVector::ones(6)),
          std::invalid_argument);
    }
    SUBCASE("gap norms fall from the first to the last quartile") {
      int passes = 0;
      for (int seed = 0; seed < 4; ++seed) {
        SpgConfig cfg;
        cfg.n_iters = 40;
        cfg.seed = 7100 + seed;
        const SpgState s = spg_optimize(cfg, ch, CovariancePair::isotropic(3),
                                        PhaseVector::ones(6));
        std::vector<double> head(s.gap_norms.begin(), s.gap_norms.begin() + 10);
        std::vector<double> tail(s.gap_norms.end() - 10, s.gap_norms.end());
        std::sort(head.begin(), head.end());
        std::sort(tail.begin(), tail.end());
        if (tail[5] < head[5]) ++passes;
      }
      CHECK(passes >= 3);
    }
  }

  TEST_CASE("batch sizes follow the growth law inside the optimizer") {
    Rng crng(72);
    ChannelRealization ch = spg_channel(crng);
    SpgConfig cfg;
    cfg.n_iters = 6;
    cfg.alpha = 1.4;
    cfg.seed = 73;
    const SpgState s = spg_optimize(cfg, ch, CovariancePair::isotropic(3), PhaseVector::ones(6));
    REQUIRE(s.trace.rows.size() == 6);
    for (int t = 1; t <= 6; ++t)
      CHECK(s.trace.rows[t - 1].step_or_l == static_cast<double>(batch_size(t, 1.4)));
  }
}
