#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spinsqueeze/experiments.hpp"

using namespace ssq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quick(Scheme scheme, int n_s, int n_j) {
  ExperimentConfig cfg;
  cfg.scheme = scheme;
  cfg.n_s = n_s;
  cfg.n_j = n_j;
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config_json_round_trip_and_validation") {
  ExperimentConfig cfg = quick(Scheme::tat_pulse, 12, 1200);
  cfg.g = {0.8, 1.1, -1.5};
  cfg.noise = {1e-4, 2e-4, 99};
  cfg.prop.krylov_dim = 44;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.scheme == Scheme::tat_pulse);
  CHECK(back.n_s == 12);
  CHECK(back.g.gy == 1.1);
  CHECK(back.noise.seed == 99);
  CHECK(back.prop.krylov_dim == 44);

  CHECK_THROWS_AS(scheme_from_name("free-bogus"), Error);
  json bad = cfg.to_json();
  bad["g"]["z"] = 0.0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), Error);
}

TEST_CASE("auto_horizon_and_default_directions") {
  ExperimentConfig oat = quick(Scheme::free_oat, 50, 100);
  CHECK(oat.predicted_t_min() ==
        doctest::Approx(2.0 * std::pow(3.0, 1.0 / 6.0) * 2.0 /
                        std::pow(50.0, 2.0 / 3.0)));
  CHECK(oat.resolved_horizon() == doctest::Approx(1.5 * oat.predicted_t_min()));
  CHECK(oat.initial_direction().first == doctest::Approx(M_PI / 2));

  ExperimentConfig tat = quick(Scheme::free_tat, 50, 100);
  CHECK(tat.predicted_t_min() ==
        doctest::Approx(3.0 * 2.0 * std::log(200.0) / 50.0));
  CHECK(tat.initial_direction().first == 0.0);

  ExperimentConfig pulse = quick(Scheme::tat_pulse, 20, 2000);
  CHECK(pulse.resolved_dt() == doctest::Approx(4.0 * M_PI / 4000.0));
}

TEST_CASE("zero_horizon_gives_single_unit_sample") {
  ExperimentConfig cfg = quick(Scheme::free_oat, 10, 100);
  cfg.samples = 0;
  const auto result = run_trace(cfg);
  CHECK(result.trace.size() == 1);
  CHECK(result.optimal.xi2_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(result.bracketed);
}

TEST_CASE("oat_trace_matches_asymptotic_formula") {
  ExperimentConfig cfg = quick(Scheme::free_oat, 50, 100);
  cfg.samples = 240;
  const auto result = run_trace(cfg);
  CHECK(result.bracketed);
  CHECK(std::abs(result.optimal.xi2_min - 0.0767) / 0.0767 < 0.1);
  CHECK(std::abs(result.optimal.t_min - 0.354) / 0.354 < 0.1);
}

TEST_CASE("eff_and_oat_traces_identical") {
  ExperimentConfig oat = quick(Scheme::free_oat, 30, 3000);
  oat.samples = 60;
  ExperimentConfig eff = oat;
  eff.scheme = Scheme::free_eff;
  const auto a = run_trace(oat);
  const auto b = run_trace(eff);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(std::abs(a.trace.xi2[i] - b.trace.xi2[i]) < 1e-9);
}

TEST_CASE("exact_model_reproduces_oat_minimum_small") {
  // n_s = 10, n_j = 1000: minima agree with the dense OAT oracle within 10%
  ExperimentConfig oat = quick(Scheme::free_oat, 10, 1000);
  oat.samples = 200;
  const auto ref = run_trace(oat);

  ExperimentConfig full = quick(Scheme::free_int, 10, 1000);
  full.samples = 80;
  const auto got = run_trace(full);
  CHECK(std::abs(got.optimal.xi2_min - ref.optimal.xi2_min) / ref.optimal.xi2_min <
        0.10);
  CHECK(std::abs(got.optimal.t_min - ref.optimal.t_min) / ref.optimal.t_min < 0.15);
}

TEST_CASE("budget_refusal") {
  ExperimentConfig cfg = quick(Scheme::free_int, 40, 4000);
  cfg.budget_bytes = 1 << 16;
  try {
    run_trace(cfg);
    FAIL("expected budget refusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::budget);
    CHECK(std::string(e.what()).find("bytes") != std::string::npos);
  }
}

TEST_CASE("horizon_extension_recovers_clipped_minimum") {
  ExperimentConfig cfg = quick(Scheme::free_oat, 40, 100);
  cfg.samples = 60;
  cfg.horizon = 0.3 * cfg.predicted_t_min();  // deliberately too short
  const auto result = run_trace(cfg);
  CHECK(result.bracketed);
  CHECK(result.extensions >= 1);
  CHECK(std::abs(result.optimal.xi2_min - 0.5 * std::pow(40 / 3.0, -2.0 / 3.0)) /
            (0.5 * std::pow(40 / 3.0, -2.0 / 3.0)) <
        0.15);
}

TEST_CASE("scaling_sweep_and_preconditions") {
  ExperimentConfig base = quick(Scheme::free_oat, 10, 1000);
  base.samples = 200;

  const std::vector<double> too_few{10, 20, 40};
  CHECK_THROWS_AS(run_scaling(base, SweepKind::over_n_s, too_few), Error);

  const std::vector<double> values{10, 20, 40, 80};
  const auto result = run_scaling(base, SweepKind::over_n_s, values);
  REQUIRE(result.fit_xi2.has_value());
  REQUIRE(result.fit_tmin.has_value());
  CHECK(std::abs(result.fit_xi2->exponent + 2.0 / 3.0) < 0.1);
  CHECK(std::abs(result.fit_tmin->exponent + 2.0 / 3.0) < 0.1);
  CHECK(result.fit_xi2->r_squared > 0.99);
}

TEST_CASE("ratio_sweep_converges_to_dense_oat") {
  ExperimentConfig oat = quick(Scheme::free_oat, 10, 1000);
  oat.samples = 200;
  const double reference = run_trace(oat).optimal.xi2_min;

  ExperimentConfig base = quick(Scheme::free_int, 10, 1000);
  base.samples = 60;
  const std::vector<double> ratios{10, 30, 100, 300};
  const auto result = run_scaling(base, SweepKind::over_ratio, ratios);
  REQUIRE(result.points.size() == 4);
  for (const auto& pt : result.points) REQUIRE(pt.ok);
  const double first_gap = std::abs(result.points.front().optimal.xi2_min - reference);
  const double last_gap = std::abs(result.points.back().optimal.xi2_min - reference);
  CHECK(last_gap < first_gap);
  CHECK(last_gap / reference < 0.05);
}

TEST_CASE("noise_mc_zero_sigma_reproduces_nominal_bit_exact") {
  ExperimentConfig cfg = quick(Scheme::tat_pulse, 8, 400);
  cfg.horizon_multiplier = 0.6;  // enough periods to sample, keeps it quick
  const std::vector<std::pair<double, double>> grid{{0.0, 0.0}};
  const auto result = run_noise_mc(cfg, grid, 3);
  REQUIRE(result.cells.size() == 1);
  const auto& cell = result.cells[0];
  for (const double v : cell.xi2_min) CHECK(v == result.nominal.xi2_min);
  for (std::size_t i = 0; i < cell.times.size(); ++i) {
    CHECK(cell.stddev[i] == 0.0);
    CHECK(cell.min[i] == cell.max[i]);
  }

  const auto single = run_noise_mc(cfg, grid, 1);
  CHECK(single.cells[0].xi2_min_std == 0.0);
}

TEST_CASE("noise_mc_requires_pulsed_scheme") {
  ExperimentConfig cfg = quick(Scheme::free_oat, 8, 400);
  const std::vector<std::pair<double, double>> grid{{1e-4, 0.0}};
  CHECK_THROWS_AS(run_noise_mc(cfg, grid, 2), Error);
}

TEST_CASE("husimi_snapshots_and_files") {
  const fs::path dir = fs::temp_directory_path() / "ssq_husimi_test";
  fs::remove_all(dir);
  ExperimentConfig cfg = quick(Scheme::free_oat, 24, 100);
  cfg.samples = 160;
  cfg.output_prefix = (dir / "run").string();
  const auto result = run_husimi(cfg, {});
  REQUIRE(result.snapshots.size() == 4);
  for (const auto& snap : result.snapshots) {
    CHECK(std::abs(snap.grid.sphere_integral() - 1.0) < 1e-3);
    CHECK(snap.grid.q.minCoeff() > -1e-14);
  }
  CHECK(result.snapshots.back().aspect_ratio > 2.0);  // t = t_min, n >= 20

  ExperimentConfig t0_cfg = quick(Scheme::free_oat, 24, 100);
  const std::vector<double> only_zero{0.0};
  const auto at_zero = run_husimi(t0_cfg, only_zero);
  CHECK(at_zero.snapshots[0].aspect_ratio == doctest::Approx(1.0).epsilon(0.05));

  for (int k = 0; k < 4; ++k) {
    CHECK(fs::exists(dir / ("run.husimi_" + std::to_string(k) + ".csv")));
    CHECK(fs::exists(dir / ("run.husimi_" + std::to_string(k) + ".json")));
  }
  const json sidecar = json::parse(slurp(dir / "run.husimi_0.json"));
  CHECK(sidecar.contains("mean_spin"));
  fs::remove_all(dir);
}

TEST_CASE("trace_outputs_are_deterministic_and_complete") {
  const fs::path dir = fs::temp_directory_path() / "ssq_trace_test";
  fs::remove_all(dir);
  ExperimentConfig cfg = quick(Scheme::free_int, 6, 120);
  cfg.samples = 30;
  cfg.output_prefix = (dir / "a" / "run").string();
  run_trace(cfg);
  REQUIRE(fs::exists(dir / "a" / "run.trace.csv"));
  REQUIRE(fs::exists(dir / "a" / "run.summary.json"));

  const std::string csv = slurp(dir / "a" / "run.trace.csv");
  CHECK(csv.rfind("t,xi2,Sx,Sy,Sz,VarMin,VarMax\n", 0) == 0);

  const json summary = json::parse(slurp(dir / "a" / "run.summary.json"));
  CHECK(summary.contains("manifest"));
  CHECK(summary["manifest"]["config"]["n_s"] == 6);
  CHECK(summary["manifest"].contains("version"));

  cfg.output_prefix = (dir / "b" / "run").string();
  run_trace(cfg);
  CHECK(slurp(dir / "b" / "run.trace.csv") == csv);  // bit-for-bit reproduction
  fs::remove_all(dir);
}

TEST_CASE("verify_report_is_green") {
  const auto report = run_verify();
  for (const auto& check : report.checks)
    INFO(check.name, ": ", check.detail);
  CHECK(report.all_pass);
  CHECK(report.checks.size() >= 15);
}
