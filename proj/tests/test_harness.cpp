#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lisec/harness.hpp"

using namespace lisec;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "") {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("empty config file yields the documented defaults") {
    TempFile f("lisec_empty.cfg");
    const ExperimentConfig cfg = load_config(f.path);
    CHECK(cfg.channel.dims.n_t == 16);
    CHECK(cfg.channel.dims.n_i == 32);
    CHECK(cfg.channel.dims.n_e == 10);
    CHECK(cfg.channel.rician_k == 10.0);
    CHECK(cfg.channel.noise_power_dbm == -80.0);
    CHECK(cfg.channel.geometry.zeta_ai == 2.0);
    CHECK(cfg.channel.geometry.zeta_ir == 2.8);
    CHECK(cfg.channel.geometry.zeta_ie == 3.0);
    CHECK(cfg.channel.geometry.c0 == doctest::Approx(1e-3));
    CHECK(cfg.trials == 10);
    CHECK(cfg.saa.k_samples == 500);
    CHECK(cfg.spg.n_iters == 60);
  }

  TEST_CASE("single-key override leaves everything else untouched") {
    TempFile f("lisec_ni.cfg", "dims.n_i = 40\n");
    const ExperimentConfig cfg = load_config(f.path);
    CHECK(cfg.channel.dims.n_i == 40);
    CHECK(cfg.channel.dims.n_t == 16);
    CHECK(cfg.channel.dims.n_e == 10);
  }

  TEST_CASE("parse errors name the offending line") {
    SUBCASE("malformed line") {
      TempFile f("lisec_bad1.cfg", "dims.n_t = 8\nthis is not a key value pair\n");
      try {
        load_config(f.path);
        FAIL("expected a parse error");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      }
    }
    SUBCASE("unknown key is a hard error") {
      TempFile f("lisec_bad2.cfg", "dims.n_tt = 8\n");
      try {
        load_config(f.path);
        FAIL("expected a parse error");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        CHECK(std::string(e.what()).find("n_tt") != std::string::npos);
      }
    }
    SUBCASE("bad number") {
      TempFile f("lisec_bad3.cfg", "channel.rician_k = ten\n");
      CHECK_THROWS_AS(load_config(f.path), ConfigError);
    }
    SUBCASE("missing file") {
      CHECK_THROWS_AS(load_config("/nonexistent/lisec.cfg"), ConfigError);
    }
  }

  TEST_CASE("environment variable overrides the master seed") {
    TempFile f("lisec_seed.cfg", "experiment.master_seed = 42\n");
    setenv("LISEC_MASTER_SEED", "777", 1);
    const ExperimentConfig cfg = load_config(f.path);
    unsetenv("LISEC_MASTER_SEED");
    CHECK(cfg.master_seed == 777);
    const ExperimentConfig cfg2 = load_config(f.path);
    CHECK(cfg2.master_seed == 42);
  }

  TEST_CASE("comments and blank lines are ignored") {
    TempFile f("lisec_comments.cfg",
               "# full line comment\n\n dims.n_e = 4  # trailing comment\n");
    CHECK(load_config(f.path).channel.dims.n_e == 4);
  }

  TEST_CASE("csv determinism and row accounting on a tiny experiment") {
    const std::string out1 =
        (std::filesystem::temp_directory_path() / "lisec_run1.csv").string();
    const std::string out2 =
        (std::filesystem::temp_directory_path() / "lisec_run2.csv").string();
    ExperimentConfig cfg;
    cfg.experiment_id = ExperimentId::power_sweep;
    cfg.objective = ObjectiveId::C1;
    cfg.solvers = {"alt", "baseline"};
    cfg.power_grid_dbm = {15.0};
    cfg.trials = 1;
    cfg.validation_samples = 400;
    cfg.channel.dims = {3, 6, 2};
    cfg.alt.max_iters = 10;
    cfg.output_path = out1;
    const auto rows1 = run_experiment(cfg);
    cfg.output_path = out2;
    const auto rows2 = run_experiment(cfg);

    CHECK(slurp(out1) == slurp(out2));

    int finals = 0;
    std::set<std::string> triples;
    std::set<std::string> full_keys;
    for (const ResultRow& r : rows1) {
      CHECK(r.std_error >= 0.0);
      CHECK(r.wall_ms == 0.0);  // deterministic output by default
      full_keys.insert(std::to_string(r.seed) + "/" + r.solver + "/" +
                       std::to_string(r.p_dbm) + "/" + r.objective_id + "/" +
                       std::to_string(r.iteration));
      if (r.iteration == -1) {
        ++finals;
        triples.insert(std::to_string(r.seed) + "/" + r.solver + "/" +
                       std::to_string(r.p_dbm));
      }
    }
    CHECK(finals == 2);  // solvers x grid x trials
    CHECK(triples.size() == 2);
    CHECK(full_keys.size() == rows1.size());

    // optimized beats the random-phase baseline well beyond validation noise
    double alt_rate = 0.0, base_rate = 0.0, pooled = 0.0;
    for (const ResultRow& r : rows1) {
      if (r.iteration != -1) continue;
      if (r.solver == "alt") alt_rate = r.rate_bits;
      if (r.solver == "baseline") base_rate = r.rate_bits;
      pooled += r.std_error * r.std_error;
    }
    CHECK(alt_rate >= base_rate - 3.0 * std::sqrt(pooled));
    std::remove(out1.c_str());
    std::remove(out2.c_str());
  }

  TEST_CASE("isotropic covariance is the feasibility witness") {
    const CovariancePair p = CovariancePair::isotropic(16);
    CHECK(p.is_feasible());
    CHECK(p.trace_sum() == doctest::Approx(1.0));
  }

  TEST_CASE("alt solver demands the exact-expectation objective") {
    ExperimentConfig cfg;
    cfg.experiment_id = ExperimentId::power_sweep;
    cfg.objective = ObjectiveId::C3;
    cfg.solvers = {"alt"};
    cfg.power_grid_dbm = {10.0};
    cfg.trials = 1;
    cfg.output_path =
        (std::filesystem::temp_directory_path() / "lisec_never.csv").string();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }

  TEST_CASE("csv floats use 12 significant digits") {
    CHECK(detail::fmt_g12(1.0 / 3.0) == "0.333333333333");
    CHECK(detail::fmt_g12(0.0) == "0");
  }

  TEST_CASE("selftest passes") {
    std::ostringstream sink;
    CHECK(selftest(sink));
    CHECK(sink.str().find("FAIL") == std::string::npos);
  }
}
