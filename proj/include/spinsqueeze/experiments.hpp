#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spinsqueeze/fit.hpp"
#include "spinsqueeze/model.hpp"
#include "spinsqueeze/observables.hpp"
#include "spinsqueeze/pulses.hpp"

namespace ssq {

enum class Scheme {
  free_int,
  free_oat,
  free_eff,
  free_fn_hp,
  free_tat,
  echo,
  tat_pulse,
};

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);
bool scheme_is_tat_class(Scheme s);   // TAT-class: Eq.-style 1/N horizon
bool scheme_uses_product_space(Scheme s);
bool scheme_is_pulsed(Scheme s);

struct ExperimentConfig {
  Scheme scheme = Scheme::free_oat;
  int n_s = 20;
  int n_j = 2000;
  CouplingParams g{1.0, 1.0, -2.0};

  double horizon = 0.0;             // 0: auto from the scaling formulas
  double horizon_multiplier = 1.5;  // times the predicted optimal time
  int samples = 160;                // continuous schemes
  double dt = 0.0;                  // pulse separation; 0: 4pi/(n_j |gz|)

  // Initial CSS direction of S; unset: +x for OAT-class, +z for TAT-class.
  std::optional<double> theta_s;
  std::optional<double> phi_s;

  BosonSpace boson;                 // free-fn-hp only
  NoiseSpec noise;
  PropagatorConfig prop;

  std::uint64_t seed = 0x5eed;
  std::size_t budget_bytes = kDefaultBudgetBytes;
  bool deterministic = true;
  std::string output_prefix;        // empty: no files written
  int threads = 0;                  // 0: SPINSQUEEZE_THREADS or hardware

  int max_horizon_extensions = 3;

  double resolved_dt() const;
  double resolved_horizon() const;       // auto-horizon if horizon == 0
  double predicted_t_min() const;        // scaling-formula estimate
  std::pair<double, double> initial_direction() const;
  int resolved_threads() const;

  nlohmann::json to_json() const;        // fully resolved
  static ExperimentConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct TraceResult {
  SqueezingTrace trace;
  OptimalSqueezing optimal;
  bool bracketed = true;   // false: minimum stayed on the boundary
  int extensions = 0;      // horizon auto-extensions performed
  nlohmann::json summary;  // includes the manifest
};

TraceResult run_trace(const ExperimentConfig& cfg);

enum class SweepKind { over_n_s, over_ratio };

struct ScalingPoint {
  double value = 0.0;     // n_s or n_j/n_s
  OptimalSqueezing optimal;
  bool ok = false;
  std::string error;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  std::optional<FitResult> fit_xi2;   // n_s sweeps only
  std::optional<FitResult> fit_tmin;
  nlohmann::json summary;
};

// Requires >= 4 sweep values; per-point failures are recorded and the fit
// proceeds on the survivors (at least 4).
ScalingResult run_scaling(const ExperimentConfig& base, SweepKind kind,
                          std::span<const double> values);

struct NoiseCell {
  double sigma_area = 0.0;
  double sigma_sep = 0.0;
  std::vector<double> xi2_min;            // per trajectory
  std::vector<std::uint64_t> seeds;       // per trajectory
  std::vector<double> t_of_min;
  // pointwise-in-t statistics across trajectories
  std::vector<double> times;
  std::vector<double> mean, stddev, min, max;
  double xi2_min_mean = 0.0, xi2_min_std = 0.0;
};

struct NoiseResult {
  std::vector<NoiseCell> cells;
  OptimalSqueezing nominal;
  nlohmann::json summary;
};

NoiseResult run_noise_mc(const ExperimentConfig& cfg,
                         std::span<const std::pair<double, double>> grid,
                         int trajectories);

struct HusimiSnapshot {
  double t = 0.0;
  HusimiGrid grid;
  Eigen::Vector3d mean_spin;
  double aspect_ratio = 1.0;  // sqrt(var_max / var_min) of the state
};

struct HusimiResult {
  std::vector<HusimiSnapshot> snapshots;
  OptimalSqueezing optimal;
  nlohmann::json summary;
};

// Default snapshot times: {1/4, 1/2, 3/4, 1} of the computed optimal time.
HusimiResult run_husimi(const ExperimentConfig& cfg,
                        std::span<const double> times = {});

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;
  nlohmann::json to_json() const;
};

// Fast self-check of the library invariants (algebra, builders, propagator
// oracles, pulse identities); the CLI `verify` subcommand.
VerifyReport run_verify();

// Atomic write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

const char* version_string();

}  // namespace ssq
