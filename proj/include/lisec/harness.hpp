#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "lisec/saa.hpp"
#include "lisec/special_cases.hpp"
#include "lisec/spg_cp.hpp"

namespace lisec {

/// Configuration / input problems; the CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentId { power_sweep, nis_sweep, convergence, an_comparison, c2_c4_ne1 };

inline std::string experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::power_sweep: return "power_sweep";
    case ExperimentId::nis_sweep: return "nis_sweep";
    case ExperimentId::convergence: return "convergence";
    case ExperimentId::an_comparison: return "an_comparison";
    case ExperimentId::c2_c4_ne1: return "c2_c4_ne1";
  }
  return "?";
}

struct AltConfig {
  int max_iters = 50;
  double tol = 1e-7;
};

struct ExperimentConfig {
  ExperimentId experiment_id = ExperimentId::power_sweep;
  ChannelConfig channel;
  std::vector<std::string> solvers = {"saa", "spg", "alt"};
  ObjectiveId objective = ObjectiveId::C1;
  std::vector<double> power_grid_dbm = {10, 15, 20, 25, 30};
  std::vector<int> nis_grid = {8, 16, 24, 32, 40};
  int trials = 10;
  std::uint64_t master_seed = 20240707;
  std::string output_path = "results.csv";
  int validation_samples = 10000;
  bool record_walltime = false;  ///< timings break byte-identical reruns, so off by default
  SaaConfig saa{.k_samples = 500};
  SpgConfig spg;
  AltConfig alt;
};

struct ResultRow {
  std::string experiment_id;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string solver;
  std::string objective_id;
  double p_dbm = 0.0;
  int n_i = 0;
  int iteration = -1;  ///< -1 marks the final row of a run
  double rate_bits = 0.0;
  double std_error = 0.0;
  double wall_ms = 0.0;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
  }
}

inline bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": expected true/false, got '" + s + "'");
}

inline Vec3 parse_vec3(const std::string& s, int line) {
  const auto toks = split_ws(s);
  if (toks.size() != 3)
    throw ConfigError("line " + std::to_string(line) + ": expected 3 coordinates");
  return Vec3(parse_double(toks[0], line), parse_double(toks[1], line),
              parse_double(toks[2], line));
}

inline ObjectiveId parse_objective(const std::string& s, int line) {
  if (s == "C1") return ObjectiveId::C1;
  if (s == "C2") return ObjectiveId::C2;
  if (s == "C3") return ObjectiveId::C3;
  if (s == "C4") return ObjectiveId::C4;
  throw ConfigError("line " + std::to_string(line) + ": unknown objective '" + s + "'");
}

inline ExperimentId parse_experiment(const std::string& s, int line) {
  if (s == "power_sweep") return ExperimentId::power_sweep;
  if (s == "nis_sweep") return ExperimentId::nis_sweep;
  if (s == "convergence") return ExperimentId::convergence;
  if (s == "an_comparison") return ExperimentId::an_comparison;
  if (s == "c2_c4_ne1") return ExperimentId::c2_c4_ne1;
  throw ConfigError("line " + std::to_string(line) + ": unknown experiment '" + s + "'");
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  auto& ch = cfg.channel;
  if (key == "experiment.id") cfg.experiment_id = parse_experiment(value, line);
  else if (key == "experiment.trials") cfg.trials = static_cast<int>(parse_int(value, line));
  else if (key == "experiment.master_seed")
    cfg.master_seed = static_cast<std::uint64_t>(parse_int(value, line));
  else if (key == "experiment.output") cfg.output_path = value;
  else if (key == "experiment.solvers") cfg.solvers = split_ws(value);
  else if (key == "experiment.objective") cfg.objective = parse_objective(value, line);
  else if (key == "experiment.validation_samples")
    cfg.validation_samples = static_cast<int>(parse_int(value, line));
  else if (key == "experiment.record_walltime") cfg.record_walltime = parse_bool(value, line);
  else if (key == "experiment.power_grid_dbm") {
    cfg.power_grid_dbm.clear();
    for (const auto& t : split_ws(value)) cfg.power_grid_dbm.push_back(parse_double(t, line));
  } else if (key == "experiment.nis_grid") {
    cfg.nis_grid.clear();
    for (const auto& t : split_ws(value))
      cfg.nis_grid.push_back(static_cast<int>(parse_int(t, line)));
  } else if (key == "dims.n_t") ch.dims.n_t = static_cast<int>(parse_int(value, line));
  else if (key == "dims.n_i") ch.dims.n_i = static_cast<int>(parse_int(value, line));
  else if (key == "dims.n_e") ch.dims.n_e = static_cast<int>(parse_int(value, line));
  else if (key == "geometry.ap_pos") ch.geometry.ap_pos = parse_vec3(value, line);
  else if (key == "geometry.lis_pos") ch.geometry.lis_pos = parse_vec3(value, line);
  else if (key == "geometry.rx_pos") ch.geometry.rx_pos = parse_vec3(value, line);
  else if (key == "geometry.eve_pos") ch.geometry.eve_pos = parse_vec3(value, line);
  else if (key == "geometry.c0_db")
    ch.geometry.c0 = std::pow(10.0, parse_double(value, line) / 10.0);
  else if (key == "geometry.d0") ch.geometry.d0 = parse_double(value, line);
  else if (key == "geometry.zeta_ai") ch.geometry.zeta_ai = parse_double(value, line);
  else if (key == "geometry.zeta_ir") ch.geometry.zeta_ir = parse_double(value, line);
  else if (key == "geometry.zeta_ie") ch.geometry.zeta_ie = parse_double(value, line);
  else if (key == "channel.rician_k") ch.rician_k = parse_double(value, line);
  else if (key == "channel.noise_power_dbm") ch.noise_power_dbm = parse_double(value, line);
  else if (key == "channel.tx_power_dbm") ch.tx_power_dbm = parse_double(value, line);
  else if (key == "channel.los_aod") ch.los_aod = parse_double(value, line);
  else if (key == "channel.los_aoa") ch.los_aoa = parse_double(value, line);
  else if (key == "saa.k_samples") cfg.saa.k_samples = static_cast<int>(parse_int(value, line));
  else if (key == "saa.l0") cfg.saa.l0 = parse_double(value, line);
  else if (key == "saa.max_outer") cfg.saa.max_outer = static_cast<int>(parse_int(value, line));
  else if (key == "saa.objective_tol") cfg.saa.objective_tol = parse_double(value, line);
  else if (key == "saa.inner_max_iterations")
    cfg.saa.inner.max_iterations = static_cast<int>(parse_int(value, line));
  else if (key == "saa.inner_tol") cfg.saa.inner.tol = parse_double(value, line);
  else if (key == "spg.alpha") cfg.spg.alpha = parse_double(value, line);
  else if (key == "spg.n_iters") cfg.spg.n_iters = static_cast<int>(parse_int(value, line));
  else if (key == "spg.r") cfg.spg.r = parse_double(value, line);
  else if (key == "spg.l_est_trials")
    cfg.spg.l_est_trials = static_cast<int>(parse_int(value, line));
  else if (key == "spg.validation_samples")
    cfg.spg.validation_samples = static_cast<int>(parse_int(value, line));
  else if (key == "alt.max_iters") cfg.alt.max_iters = static_cast<int>(parse_int(value, line));
  else if (key == "alt.tol") cfg.alt.tol = parse_double(value, line);
  else
    throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Flat "section.key = value" format; '#' starts a comment; unknown keys are
/// hard errors. An empty file yields the documented defaults.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    detail::apply_key(cfg, key, value, line_no);
  }
  if (const char* env = std::getenv("LISEC_MASTER_SEED")) {
    cfg.master_seed = static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
  }
  if (cfg.trials < 1) throw ConfigError("experiment.trials must be positive");
  try {
    cfg.channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid channel configuration: ") + e.what());
  }
  return cfg;
}

namespace detail {

inline std::string fmt_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct SolverRun {
  CovariancePair pair;
  PhaseVector v;
  SolverTrace trace;
  double wall_ms = 0.0;
};

inline SolverRun run_solver(const std::string& name, ObjectiveId objective,
                            const ExperimentConfig& cfg, const ChannelRealization& ch,
                            std::uint64_t seed) {
  const int n_t = static_cast<int>(ch.g.rows());
  const CovariancePair pair0 = CovariancePair::isotropic(n_t);
  const PhaseVector v0 = PhaseVector::ones(static_cast<int>(ch.g.cols()));
  const auto t0 = std::chrono::steady_clock::now();
  SolverRun run;
  if (name == "saa") {
    Rng rng(mix_seed(seed, 0x5AA0ull));
    SaaState s = saa_optimize(cfg.saa, objective, ch, v0, pair0, rng);
    run = {s.pair, s.v, s.trace, 0.0};
  } else if (name == "spg") {
    SpgConfig c = cfg.spg;
    c.seed = mix_seed(seed, 0x5F60ull);
    c.objective = objective;
    SpgState s = spg_optimize(c, ch, pair0, v0);
    run = {s.pair, s.v, s.trace, 0.0};
  } else if (name == "alt") {
    if (objective != ObjectiveId::C1)
      throw ConfigError("solver 'alt' only applies to objective C1");
    AltOptReport rep = alt_opt_c1(ch, v0, cfg.alt.max_iters, cfg.alt.tol);
    run.pair = CovariancePair{rep.omega * rep.omega.adjoint(), CMat::Zero(n_t, n_t)};
    run.v = rep.v;
    for (std::size_t i = 0; i < rep.objective_trace.size(); ++i)
      run.trace.rows.push_back({static_cast<int>(i), rep.objective_trace[i], 0.0, 0, 0.0, 0.0});
  } else if (name == "baseline") {
    Rng rng(mix_seed(seed, 0xBA5Eull));
    run.pair = pair0;
    CVec v(ch.g.cols());
    for (Eigen::Index k = 0; k < v.size(); ++k)
      v(k) = std::polar(1.0, 2.0 * kPi * rng.uniform() - kPi);
    run.v = PhaseVector{v};
  } else {
    throw ConfigError("unknown solver '" + name + "'");
  }
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return run;
}

}  // namespace detail

/// Evaluates the baseline operating point (isotropic message covariance,
/// uniform-random phases) on one channel.
inline RateEstimate baseline_random_phase(ObjectiveId objective, const ChannelRealization& ch,
                                          int n_samples, Rng& rng) {
  const int n_t = static_cast<int>(ch.g.rows());
  CVec v(ch.g.cols());
  for (Eigen::Index k = 0; k < v.size(); ++k)
    v(k) = std::polar(1.0, 2.0 * kPi * rng.uniform() - kPi);
  return secrecy_rate(objective, CovariancePair::isotropic(n_t), PhaseVector{v}, ch, n_samples,
                      rng);
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  out << "experiment_id,trial,seed,solver,objective_id,p_dbm,n_i,iteration,rate_bits,"
         "std_error,wall_ms\n";
  for (const ResultRow& r : rows) {
    out << r.experiment_id << ',' << r.trial << ',' << r.seed << ',' << r.solver << ','
        << r.objective_id << ',' << detail::fmt_g12(r.p_dbm) << ',' << r.n_i << ','
        << r.iteration << ',' << detail::fmt_g12(r.rate_bits) << ','
        << detail::fmt_g12(r.std_error) << ',' << detail::fmt_g12(r.wall_ms) << '\n';
  }
  if (!out.good()) throw std::runtime_error("short write to CSV file: " + path);
}

/// Runs the configured experiment; rows are produced in deterministic
/// (grid, trial, solver) order and also written to the output CSV.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment_id == ExperimentId::power_sweep ||
      cfg.experiment_id == ExperimentId::nis_sweep) {
    for (const std::string& s : cfg.solvers)
      if (s == "alt" && cfg.objective != ObjectiveId::C1)
        throw ConfigError("solver 'alt' only applies to objective C1");
  }
  std::vector<ResultRow> rows;

  const auto emit_run = [&](const std::string& exp_id, int trial, std::uint64_t seed,
                            const std::string& solver, ObjectiveId objective, double p_dbm,
                            int n_i, const ChannelRealization& ch,
                            const detail::SolverRun& run) {
    for (const SolverTraceRow& tr : run.trace.rows)
      rows.push_back({exp_id, trial, seed, solver, objective_name(objective), p_dbm, n_i,
                      tr.iteration, tr.objective, 0.0, 0.0});
    Rng vrng(mix_seed(seed, 0xC0FFEEull));
    const RateEstimate est =
        secrecy_rate(objective, run.pair, run.v, ch, cfg.validation_samples, vrng);
    rows.push_back({exp_id, trial, seed, solver, objective_name(objective), p_dbm, n_i, -1,
                    est.value, est.std_error, cfg.record_walltime ? run.wall_ms : 0.0});
  };

  const std::string exp_id = experiment_name(cfg.experiment_id);
  switch (cfg.experiment_id) {
    case ExperimentId::power_sweep: {
      if (cfg.power_grid_dbm.empty()) throw ConfigError("power_sweep: empty power grid");
      for (std::size_t gi = 0; gi < cfg.power_grid_dbm.size(); ++gi) {
        for (int trial = 0; trial < cfg.trials; ++trial) {
          ChannelConfig cc = cfg.channel;
          cc.tx_power_dbm = cfg.power_grid_dbm[gi];
          const std::uint64_t seed = mix_seed(cfg.master_seed, gi, trial);
          Rng rng(seed);
          const ChannelRealization ch = sample_channels(cc, cfg.objective, rng);
          for (const std::string& solver : cfg.solvers) {
            const detail::SolverRun run = detail::run_solver(solver, cfg.objective, cfg, ch, seed);
            emit_run(exp_id, trial, seed, solver, cfg.objective, cc.tx_power_dbm,
                     cc.dims.n_i, ch, run);
          }
        }
      }
      break;
    }
    case ExperimentId::nis_sweep: {
      if (cfg.nis_grid.empty()) throw ConfigError("nis_sweep: empty LIS grid");
      for (std::size_t gi = 0; gi < cfg.nis_grid.size(); ++gi) {
        for (int trial = 0; trial < cfg.trials; ++trial) {
          ChannelConfig cc = cfg.channel;
          cc.dims.n_i = cfg.nis_grid[gi];
          const std::uint64_t seed = mix_seed(cfg.master_seed, 100 + gi, trial);
          Rng rng(seed);
          const ChannelRealization ch = sample_channels(cc, cfg.objective, rng);
          for (const std::string& solver : cfg.solvers) {
            const detail::SolverRun run = detail::run_solver(solver, cfg.objective, cfg, ch, seed);
            emit_run(exp_id, trial, seed, solver, cfg.objective, cc.tx_power_dbm,
                     cc.dims.n_i, ch, run);
          }
        }
      }
      break;
    }
    case ExperimentId::convergence: {
      // Initial-point study keeps the printed power asymmetry: the
      // sample-average solver runs at 15 dBm, the stochastic one at 25 dBm.
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = mix_seed(cfg.master_seed, 200, trial);
        ChannelConfig cc_saa = cfg.channel;
        cc_saa.tx_power_dbm = 15.0;
        ChannelConfig cc_spg = cfg.channel;
        cc_spg.tx_power_dbm = 25.0;
        Rng rng_a(seed);
        const ChannelRealization ch_a = sample_channels(cc_saa, cfg.objective, rng_a);
        emit_run(exp_id, trial, seed, "saa", cfg.objective, 15.0, cc_saa.dims.n_i, ch_a,
                 detail::run_solver("saa", cfg.objective, cfg, ch_a, seed));
        Rng rng_b(seed);
        const ChannelRealization ch_b = sample_channels(cc_spg, cfg.objective, rng_b);
        emit_run(exp_id, trial, seed, "spg", cfg.objective, 25.0, cc_spg.dims.n_i, ch_b,
                 detail::run_solver("spg", cfg.objective, cfg, ch_b, seed));
      }
      break;
    }
    case ExperimentId::an_comparison: {
      std::string solver = "saa";
      for (const std::string& s : cfg.solvers)
        if (s == "saa" || s == "spg") {
          solver = s;
          break;
        }
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = mix_seed(cfg.master_seed, 300, trial);
        Rng rng(seed);
        const ChannelRealization ch = sample_channels(cfg.channel, ObjectiveId::C1, rng);
        const detail::SolverRun run_c1 =
            detail::run_solver(solver, ObjectiveId::C1, cfg, ch, seed);
        emit_run(exp_id, trial, seed, solver, ObjectiveId::C1, cfg.channel.tx_power_dbm,
                 cfg.channel.dims.n_i, ch, run_c1);
        // The AN run continues from the non-AN optimum, so its sample
        // objective can only improve on it.
        detail::SolverRun run_c3;
        if (solver == "saa") {
          Rng srng(mix_seed(seed, 0x5AA3ull));
          SaaState s =
              saa_optimize(cfg.saa, ObjectiveId::C3, ch, run_c1.v, run_c1.pair, srng);
          run_c3 = {s.pair, s.v, s.trace, 0.0};
        } else {
          SpgConfig c = cfg.spg;
          c.seed = mix_seed(seed, 0x5F63ull);
          c.objective = ObjectiveId::C3;
          SpgState s = spg_optimize(c, ch, run_c1.pair, run_c1.v);
          run_c3 = {s.pair, s.v, s.trace, 0.0};
        }
        emit_run(exp_id, trial, seed, solver, ObjectiveId::C3, cfg.channel.tx_power_dbm,
                 cfg.channel.dims.n_i, ch, run_c3);
      }
      break;
    }
    case ExperimentId::c2_c4_ne1: {
      if (cfg.power_grid_dbm.empty()) throw ConfigError("c2_c4_ne1: empty power grid");
      const double zeta_cases[2] = {2.8, 2.2};
      for (int case_i = 0; case_i < 2; ++case_i) {
        const std::string case_id = exp_id + ":zir=" + (case_i == 0 ? "2.8" : "2.2");
        for (std::size_t gi = 0; gi < cfg.power_grid_dbm.size(); ++gi) {
          for (int trial = 0; trial < cfg.trials; ++trial) {
            ChannelConfig cc = cfg.channel;
            cc.dims.n_e = 1;
            cc.geometry.zeta_ir = zeta_cases[case_i];
            cc.tx_power_dbm = cfg.power_grid_dbm[gi];
            const std::uint64_t seed =
                mix_seed(cfg.master_seed, 400 + 1000 * case_i + gi, trial);
            for (ObjectiveId obj : {ObjectiveId::C2, ObjectiveId::C4}) {
              Rng rng(seed);
              const ChannelRealization ch = sample_channels(cc, obj, rng);
              const detail::SolverRun run = detail::run_solver("spg", obj, cfg, ch, seed);
              emit_run(case_id, trial, seed, "spg", obj, cc.tx_power_dbm, cc.dims.n_i, ch, run);
            }
          }
        }
      }
      break;
    }
  }
  write_csv(rows, cfg.output_path);
  return rows;
}

/// Fast invariant checks behind the `selftest` CLI verb.
inline bool selftest(std::ostream& os) {
  bool all_ok = true;
  const auto check = [&](const char* name, bool ok) {
    os << (ok ? "ok   " : "FAIL ") << name << "\n";
    all_ok = all_ok && ok;
  };
  Rng rng(7);

  bool mono = true;
  for (double z : {0.5, 2.0, 2.8}) {
    double prev = path_loss(1.0, z, 1e-3, 1.0);
    for (double d : {2.0, 5.0, 20.0, 80.0}) {
      const double cur = path_loss(d, z, 1e-3, 1.0);
      mono = mono && cur < prev;
      prev = cur;
    }
  }
  check("path_loss monotone decreasing", mono);

  bool weights_ok = true;
  for (double k : {0.0, 0.3, 10.0, 1e6}) {
    const auto [w_los_sq, w_nlos_sq] = rician_weight_squares(k);
    weights_ok = weights_ok && w_los_sq + w_nlos_sq == 1.0;
  }
  check("rician weights sum to one", weights_ok);

  ChannelConfig cc;
  cc.dims = {4, 8, 2};
  Rng r1(42), r2(42);
  check("seeded sampling reproducible",
        (sample_g_rician(cc, r1) - sample_g_rician(cc, r2)).norm() == 0.0);

  bool prox_ok = true;
  for (int i = 0; i < 25 && prox_ok; ++i) {
    const CovariancePair cur = random_feasible_pair(4, rng);
    GradientPair g{hermitize(rng.cnormal_matrix(4, 4)), hermitize(rng.cnormal_matrix(4, 4))};
    const ProxResult res = prox_pair(cur, g, 0.5);
    prox_ok = res.pair.is_feasible();
    const double lhs = real_inner(g.g_s, res.gap_s) + real_inner(g.g_z, res.gap_z);
    const double rhs = res.gap_s.squaredNorm() + res.gap_z.squaredNorm();
    prox_ok = prox_ok && lhs >= rhs - 1e-9;
  }
  check("prox feasibility and projection inequality", prox_ok);

  bool mm_ok = true;
  for (int i = 0; i < 50 && mm_ok; ++i) {
    const CMat phi = hermitize(rng.cnormal_matrix(6, 6));
    CVec v(6);
    for (int j = 0; j < 6; ++j) v(j) = std::polar(1.0, 2.0 * kPi * rng.uniform());
    const PhaseVector next = mm_step(PhaseVector{v}, phi);
    mm_ok = quadratic_form(next.v, phi) <= quadratic_form(v, phi) + 1e-9;
  }
  check("mm step never increases the quadratic", mm_ok);

  bool f1_ok = true;
  for (int n1 : {1, 2, 10}) {
    double prev = 0.0;
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const F1Result f = f1_with_derivs(t, n1);
      f1_ok = f1_ok && f.value >= prev - 1e-12 && f.d1 >= 0.0 && f.d2 <= 0.0;
      prev = f.value;
    }
  }
  check("f1 nondecreasing and concave", f1_ok);

  check("batch size rounding", batch_size(1, 1.5) == 1 && batch_size(2, 1.5) == 3 &&
                                   batch_size(4, 1.5) == 8);
  return all_ok;
}

}  // namespace lisec
