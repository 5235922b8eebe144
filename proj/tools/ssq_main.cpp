// Command-line front end; everything behind the C API of libspinsqueeze.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinsqueeze.h"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string scheme;
  int n_s = -1, n_j = -1;
  double gx = 1e300, gy = 1e300, gz = 1e300;
  double horizon = -1, horizon_multiplier = -1;
  int samples = -1;
  double dt = -1;
  double theta_s = 1e300, phi_s = 1e300;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output;
  double budget_gib = -1;
  int threads = -1;
  int krylov_dim = -1;
  double step_tol = -1;
  int boson_cutoff = -1;
  double sigma_area = -1, sigma_sep = -1;
  std::uint64_t noise_seed = 0;
  bool noise_seed_set = false;
  bool print_json = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
  cmd->add_option("--scheme", o.scheme,
                  "free-int | free-oat | free-eff | free-fn-hp | free-tat | "
                  "echo | tat-pulse");
  cmd->add_option("--n-s", o.n_s, "particle count of ensemble S");
  cmd->add_option("--n-j", o.n_j, "particle count of ensemble J");
  cmd->add_option("--gx", o.gx, "coupling g_x");
  cmd->add_option("--gy", o.gy, "coupling g_y");
  cmd->add_option("--gz", o.gz, "coupling g_z (nonzero)");
  cmd->add_option("--horizon", o.horizon, "evolution horizon (0 = auto)");
  cmd->add_option("--horizon-multiplier", o.horizon_multiplier,
                  "auto-horizon multiplier of the predicted optimal time");
  cmd->add_option("--samples", o.samples, "sample count for free schemes");
  cmd->add_option("--dt", o.dt, "pulse separation (0 = 4pi/(n_j |gz|))");
  cmd->add_option("--theta-s", o.theta_s, "initial CSS polar angle of S");
  cmd->add_option("--phi-s", o.phi_s, "initial CSS azimuth of S");
  cmd->add_option("--seed", o.seed, "base RNG seed")->each([&](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("-o,--output", o.output, "output file prefix");
  cmd->add_option("--budget-gib", o.budget_gib, "memory budget in GiB");
  cmd->add_option("--threads", o.threads, "worker threads (0 = auto)");
  cmd->add_option("--krylov-dim", o.krylov_dim, "Krylov subspace size");
  cmd->add_option("--step-tol", o.step_tol, "propagator local error target");
  cmd->add_option("--boson-cutoff", o.boson_cutoff,
                  "boson occupation cutoff (free-fn-hp)");
  cmd->add_option("--sigma-area", o.sigma_area, "relative pulse-area noise");
  cmd->add_option("--sigma-sep", o.sigma_sep, "relative pulse-separation noise");
  cmd->add_option("--noise-seed", o.noise_seed, "noise RNG seed")
      ->each([&](const std::string&) { o.noise_seed_set = true; });
  cmd->add_flag("--json", o.print_json, "print the full JSON summary");
}

json load_config(const CommonOpts& o) {
  json cfg = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + o.config_path);
    in >> cfg;
  }
  if (!o.scheme.empty()) cfg["scheme"] = o.scheme;
  if (o.n_s >= 0) cfg["n_s"] = o.n_s;
  if (o.n_j >= 0) cfg["n_j"] = o.n_j;
  if (o.gx != 1e300 || o.gy != 1e300 || o.gz != 1e300) {
    json g = cfg.value("g", json::object());
    if (o.gx != 1e300) g["x"] = o.gx;
    if (o.gy != 1e300) g["y"] = o.gy;
    if (o.gz != 1e300) g["z"] = o.gz;
    cfg["g"] = g;
  }
  if (o.horizon >= 0) cfg["horizon"] = o.horizon;
  if (o.horizon_multiplier > 0) cfg["horizon_multiplier"] = o.horizon_multiplier;
  if (o.samples >= 0) cfg["samples"] = o.samples;
  if (o.dt >= 0) cfg["dt"] = o.dt;
  if (o.theta_s != 1e300) cfg["theta_s"] = o.theta_s;
  if (o.phi_s != 1e300) cfg["phi_s"] = o.phi_s;
  if (o.seed_set) cfg["seed"] = o.seed;
  if (!o.output.empty()) cfg["output_prefix"] = o.output;
  if (o.budget_gib > 0)
    cfg["budget_bytes"] = static_cast<std::uint64_t>(o.budget_gib * (1ull << 30));
  if (o.threads >= 0) cfg["threads"] = o.threads;
  if (o.krylov_dim > 0 || o.step_tol > 0) {
    json p = cfg.value("propagator", json::object());
    if (o.krylov_dim > 0) p["krylov_dim"] = o.krylov_dim;
    if (o.step_tol > 0) p["step_tol"] = o.step_tol;
    cfg["propagator"] = p;
  }
  if (o.boson_cutoff > 0) {
    json b = cfg.value("boson", json::object());
    b["n_max"] = o.boson_cutoff;
    cfg["boson"] = b;
  }
  if (o.sigma_area >= 0 || o.sigma_sep >= 0 || o.noise_seed_set) {
    json n = cfg.value("noise", json::object());
    if (o.sigma_area >= 0) n["sigma_area"] = o.sigma_area;
    if (o.sigma_sep >= 0) n["sigma_sep"] = o.sigma_sep;
    if (o.noise_seed_set) n["seed"] = o.noise_seed;
    cfg["noise"] = n;
  }
  return cfg;
}

int run_task(const json& cfg, bool print_json) {
  char* summary = ssq_run_experiment(cfg.dump().c_str());
  if (!summary) {
    std::cerr << "error: " << ssq_last_error() << "\n";
    const int code = ssq_last_error_code();
    return (code == SSQ_ERR_INVALID_ARGUMENT || code == SSQ_ERR_BUDGET ||
            code == SSQ_ERR_NUMERICAL)
               ? code
               : 1;
  }
  const json j = json::parse(summary);
  ssq_string_free(summary);
  if (print_json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  const std::string task = cfg.value("task", "trace");
  if (task == "trace") {
    std::printf("scheme        %s\n", j.value("scheme", "?").c_str());
    std::printf("xi2_min       %.6g\n", j.value("xi2_min", 0.0));
    std::printf("t_min         %.6g\n", j.value("t_min", 0.0));
    std::printf("bracketed     %s\n", j.value("bracketed", false) ? "yes" : "no");
    std::printf("samples       %zu\n", static_cast<size_t>(j.value("samples", 0)));
  } else if (task == "scaling") {
    for (const auto& pt : j.value("points", json::array()))
      std::printf("value %-8g xi2_min %-12.6g t_min %-12.6g %s\n",
                  pt.value("value", 0.0), pt.value("xi2_min", 0.0),
                  pt.value("t_min", 0.0), pt.value("ok", false) ? "ok" : "FAILED");
    if (j.contains("fit_xi2_min"))
      std::printf("xi2_min fit: exponent %.4f (R^2 %.6f)\n",
                  j["fit_xi2_min"].value("exponent", 0.0),
                  j["fit_xi2_min"].value("r_squared", 0.0));
    if (j.contains("fit_t_min"))
      std::printf("t_min fit:   exponent %.4f (R^2 %.6f)\n",
                  j["fit_t_min"].value("exponent", 0.0),
                  j["fit_t_min"].value("r_squared", 0.0));
  } else if (task == "noise") {
    std::printf("nominal xi2_min %.6g\n",
                j.value("nominal", json::object()).value("xi2_min", 0.0));
    for (const auto& cell : j.value("cells", json::array()))
      std::printf("sigma_area %-10g sigma_sep %-10g mean xi2_min %-12.6g std %-12.6g\n",
                  cell.value("sigma_area", 0.0), cell.value("sigma_sep", 0.0),
                  cell.value("xi2_min_mean", 0.0), cell.value("xi2_min_std", 0.0));
  } else if (task == "husimi") {
    for (const auto& snap : j.value("snapshots", json::array()))
      std::printf("t %-12.6g aspect %-10.4g integral %.8f\n",
                  snap.value("t", 0.0), snap.value("aspect_ratio", 0.0),
                  snap.value("integral", 0.0));
  }
  const std::string prefix = cfg.value("output_prefix", "");
  if (!prefix.empty()) std::printf("outputs       %s.*\n", prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin squeezing simulator for coupled spin ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ssq_version()));

  CommonOpts trace_opts, scaling_opts, noise_opts, husimi_opts;
  auto* trace = app.add_subcommand("trace", "xi^2(t) for one scheme");
  add_common(trace, trace_opts);

  auto* scaling = app.add_subcommand("scaling", "sweep + power-law fit");
  add_common(scaling, scaling_opts);
  std::string sweep = "n_s";
  std::vector<double> values;
  scaling->add_option("--sweep", sweep, "n_s | ratio");
  scaling->add_option("--values", values, "sweep values")->delimiter(',');

  auto* noise = app.add_subcommand("noise", "Monte Carlo pulse-noise analysis");
  add_common(noise, noise_opts);
  std::vector<std::string> grid_spec;
  int trajectories = 20;
  noise->add_option("--grid", grid_spec,
                    "cells as sigma_area:sigma_sep (e.g. 5e-4:0)")
      ->delimiter(',');
  noise->add_option("--trajectories", trajectories, "trajectories per cell");

  auto* husimi = app.add_subcommand("husimi", "Husimi-Q snapshots");
  add_common(husimi, husimi_opts);
  std::vector<double> times;
  husimi->add_option("--times", times, "snapshot times (default: fractions of t_min)")
      ->delimiter(',');

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  bool verify_json = false;
  verify->add_flag("--json", verify_json, "print the full JSON report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) {
      int all_pass = 0;
      char* report = ssq_run_verify(&all_pass);
      if (!report) {
        std::cerr << "error: " << ssq_last_error() << "\n";
        return 1;
      }
      const json j = json::parse(report);
      ssq_string_free(report);
      if (verify_json) {
        std::cout << j.dump(2) << "\n";
      } else {
        for (const auto& c : j["checks"])
          std::printf("%-34s %s  %s\n", c.value("name", "?").c_str(),
                      c.value("pass", false) ? "PASS" : "FAIL",
                      c.value("detail", "").c_str());
      }
      return all_pass ? 0 : 1;
    }

    CommonOpts* opts = nullptr;
    std::string task;
    if (app.got_subcommand(trace)) { opts = &trace_opts; task = "trace"; }
    else if (app.got_subcommand(scaling)) { opts = &scaling_opts; task = "scaling"; }
    else if (app.got_subcommand(noise)) { opts = &noise_opts; task = "noise"; }
    else { opts = &husimi_opts; task = "husimi"; }

    json cfg = load_config(*opts);
    cfg["task"] = task;
    if (task == "scaling") {
      if (!values.empty()) cfg["values"] = values;
      cfg["sweep"] = sweep;
    } else if (task == "noise") {
      if (!grid_spec.empty()) {
        json grid = json::array();
        for (const auto& cell : grid_spec) {
          const auto colon = cell.find(':');
          if (colon == std::string::npos)
            throw CLI::ValidationError("--grid", "expected sigma_area:sigma_sep");
          grid.push_back({std::stod(cell.substr(0, colon)),
                          std::stod(cell.substr(colon + 1))});
        }
        cfg["grid"] = grid;
      }
      cfg["trajectories"] = trajectories;
    } else if (task == "husimi" && !times.empty()) {
      cfg["times"] = times;
    }
    return run_task(cfg, opts->print_json);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
