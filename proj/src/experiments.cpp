#include "spinsqueeze/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace ssq {

using nlohmann::json;

const char* version_string() { return "0.1.0"; }

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::free_int: return "free-int";
    case Scheme::free_oat: return "free-oat";
    case Scheme::free_eff: return "free-eff";
    case Scheme::free_fn_hp: return "free-fn-hp";
    case Scheme::free_tat: return "free-tat";
    case Scheme::echo: return "echo";
    case Scheme::tat_pulse: return "tat-pulse";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::free_int, Scheme::free_oat, Scheme::free_eff,
                   Scheme::free_fn_hp, Scheme::free_tat, Scheme::echo,
                   Scheme::tat_pulse})
    if (name == scheme_name(s)) return s;
  fail(ErrorCode::invalid_argument, "unknown scheme '" + name + "'");
}

bool scheme_is_tat_class(Scheme s) {
  return s == Scheme::free_tat || s == Scheme::tat_pulse;
}

bool scheme_uses_product_space(Scheme s) {
  return s == Scheme::free_int || s == Scheme::echo || s == Scheme::tat_pulse;
}

bool scheme_is_pulsed(Scheme s) {
  return s == Scheme::echo || s == Scheme::tat_pulse;
}

double ExperimentConfig::resolved_dt() const {
  if (dt > 0) return dt;
  return 4.0 * M_PI / (n_j * std::abs(g.gz));
}

double ExperimentConfig::predicted_t_min() const {
  const double product = std::abs(g.gx * g.gy);
  if (product == 0)
    fail(ErrorCode::invalid_argument,
         "auto horizon undefined for gx * gy = 0; pass an explicit horizon");
  if (scheme_is_tat_class(scheme))
    return 3.0 * std::abs(g.gz) * std::log(4.0 * n_s) / (product * n_s);
  return 2.0 * std::pow(3.0, 1.0 / 6.0) * std::abs(g.gz) /
         (product * std::pow(static_cast<double>(n_s), 2.0 / 3.0));
}

double ExperimentConfig::resolved_horizon() const {
  return horizon > 0 ? horizon : horizon_multiplier * predicted_t_min();
}

std::pair<double, double> ExperimentConfig::initial_direction() const {
  if (theta_s && phi_s) return {*theta_s, *phi_s};
  const double th = theta_s.value_or(scheme_is_tat_class(scheme) ? 0.0 : M_PI / 2);
  const double ph = phi_s.value_or(0.0);
  return {th, ph};
}

int ExperimentConfig::resolved_threads() const {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("SPINSQUEEZE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void ExperimentConfig::validate() const {
  if (n_s < 1) fail(ErrorCode::invalid_argument, "n_s must be >= 1");
  if (n_j < 1) fail(ErrorCode::invalid_argument, "n_j must be >= 1");
  g.validate();
  if (samples < 0) fail(ErrorCode::invalid_argument, "samples must be >= 0");
  if (horizon < 0 || !std::isfinite(horizon))
    fail(ErrorCode::invalid_argument, "horizon must be finite and >= 0");
  if (horizon_multiplier <= 0)
    fail(ErrorCode::invalid_argument, "horizon_multiplier must be positive");
  if (dt < 0) fail(ErrorCode::invalid_argument, "dt must be >= 0");
  if (max_horizon_extensions < 0)
    fail(ErrorCode::invalid_argument, "max_horizon_extensions must be >= 0");
  prop.validate();
  noise.validate();
  boson.validate();
}

json ExperimentConfig::to_json() const {
  const auto [th, ph] = initial_direction();
  return json{
      {"scheme", scheme_name(scheme)},
      {"n_s", n_s},
      {"n_j", n_j},
      {"g", {{"x", g.gx}, {"y", g.gy}, {"z", g.gz}}},
      {"horizon", horizon},
      {"horizon_multiplier", horizon_multiplier},
      {"samples", samples},
      {"dt", dt},
      {"theta_s", th},
      {"phi_s", ph},
      {"boson",
       {{"n_max", boson.n_max},
        {"tail_threshold", boson.tail_threshold},
        {"tail_margin", boson.tail_margin}}},
      {"noise",
       {{"sigma_area", noise.sigma_area},
        {"sigma_sep", noise.sigma_sep},
        {"seed", noise.seed}}},
      {"propagator",
       {{"krylov_dim", prop.krylov_dim},
        {"step_tol", prop.step_tol},
        {"max_substeps", prop.max_substeps},
        {"dense_threshold", prop.dense_threshold},
        {"parallel_matvec", prop.parallel_matvec}}},
      {"seed", seed},
      {"budget_bytes", budget_bytes},
      {"deterministic", deterministic},
      {"output_prefix", output_prefix},
      {"threads", threads},
      {"max_horizon_extensions", max_horizon_extensions},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("scheme")) cfg.scheme = scheme_from_name(j.at("scheme"));
  cfg.n_s = j.value("n_s", cfg.n_s);
  cfg.n_j = j.value("n_j", cfg.n_j);
  if (j.contains("g")) {
    const auto& g = j.at("g");
    cfg.g.gx = g.value("x", cfg.g.gx);
    cfg.g.gy = g.value("y", cfg.g.gy);
    cfg.g.gz = g.value("z", cfg.g.gz);
  }
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.horizon_multiplier = j.value("horizon_multiplier", cfg.horizon_multiplier);
  cfg.samples = j.value("samples", cfg.samples);
  cfg.dt = j.value("dt", cfg.dt);
  if (j.contains("theta_s")) cfg.theta_s = j.at("theta_s").get<double>();
  if (j.contains("phi_s")) cfg.phi_s = j.at("phi_s").get<double>();
  if (j.contains("boson")) {
    const auto& b = j.at("boson");
    cfg.boson.n_max = b.value("n_max", cfg.boson.n_max);
    cfg.boson.tail_threshold = b.value("tail_threshold", cfg.boson.tail_threshold);
    cfg.boson.tail_margin = b.value("tail_margin", cfg.boson.tail_margin);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.noise.sigma_area = n.value("sigma_area", 0.0);
    cfg.noise.sigma_sep = n.value("sigma_sep", 0.0);
    cfg.noise.seed = n.value("seed", std::uint64_t{0});
  }
  if (j.contains("propagator")) {
    const auto& p = j.at("propagator");
    cfg.prop.krylov_dim = p.value("krylov_dim", cfg.prop.krylov_dim);
    cfg.prop.step_tol = p.value("step_tol", cfg.prop.step_tol);
    cfg.prop.max_substeps = p.value("max_substeps", cfg.prop.max_substeps);
    cfg.prop.dense_threshold = p.value("dense_threshold", cfg.prop.dense_threshold);
    cfg.prop.parallel_matvec = p.value("parallel_matvec", cfg.prop.parallel_matvec);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.budget_bytes = j.value("budget_bytes", cfg.budget_bytes);
  cfg.deterministic = j.value("deterministic", cfg.deterministic);
  cfg.output_prefix = j.value("output_prefix", cfg.output_prefix);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.max_horizon_extensions =
      j.value("max_horizon_extensions", cfg.max_horizon_extensions);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

namespace fs = std::filesystem;

void parallel_for(int n_jobs, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, n_jobs));
  if (threads == 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_jobs) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct BuiltModel {
  std::shared_ptr<const SparseHermitianOperator> h;
  Vec psi0;
  Eigen::Index dim_j = 1;  // second-factor dimension for moments
  bool monitor_tail = false;
};

BuiltModel build_model(const ExperimentConfig& cfg) {
  const auto [th, ph] = cfg.initial_direction();
  BuiltModel m;
  switch (cfg.scheme) {
    case Scheme::free_int:
    case Scheme::echo:
    case Scheme::tat_pulse: {
      const SpinSystem sys(cfg.n_s, cfg.n_j);
      m.h = std::make_shared<SparseHermitianOperator>(
          build_h_int(cfg.g, sys, cfg.budget_bytes));
      m.psi0 = product_css(sys, th, ph, 0.0, 0.0);
      m.dim_j = sys.dim_j();
      break;
    }
    case Scheme::free_oat:
      m.h = std::make_shared<SparseHermitianOperator>(build_h_oat(cfg.g, cfg.n_s));
      m.psi0 = css(cfg.n_s, th, ph);
      break;
    case Scheme::free_eff: {
      const SpinSystem sys(cfg.n_s, cfg.n_j);
      m.h = std::make_shared<SparseHermitianOperator>(build_h_eff(cfg.g, sys));
      m.psi0 = css(cfg.n_s, th, ph);
      break;
    }
    case Scheme::free_tat:
      m.h = std::make_shared<SparseHermitianOperator>(build_h_tat(cfg.g, cfg.n_s));
      m.psi0 = css(cfg.n_s, th, ph);
      break;
    case Scheme::free_fn_hp: {
      m.h = std::make_shared<SparseHermitianOperator>(
          build_h_fn_hp(cfg.g, cfg.n_s, cfg.n_j, cfg.boson));
      const Vec spin = css(cfg.n_s, th, ph);
      const int db = cfg.boson.n_max + 1;
      Vec psi = Vec::Zero(static_cast<Eigen::Index>(cfg.n_s + 1) * db);
      for (int is = 0; is <= cfg.n_s; ++is)
        psi[static_cast<Eigen::Index>(is) * db] = spin[is];  // boson vacuum
      m.psi0 = std::move(psi);
      m.dim_j = db;
      m.monitor_tail = true;
      break;
    }
  }
  return m;
}

void check_budget(const ExperimentConfig& cfg, const BuiltModel& m) {
  const std::size_t state_bytes = static_cast<std::size_t>(m.psi0.size()) * sizeof(cplx);
  const std::size_t est = state_bytes * (static_cast<std::size_t>(cfg.prop.krylov_dim) + 6) +
                          m.h->memory_bytes();
  if (est > cfg.budget_bytes)
    fail(ErrorCode::budget, "run refused: estimated " + std::to_string(est) +
                                " bytes exceeds budget " +
                                std::to_string(cfg.budget_bytes) + " bytes");
}

void append_sample(SqueezingTrace& trace, double t, const Vec& psi, int n_s,
                   Eigen::Index dim_j) {
  const auto m = collective_moments(psi, n_s, dim_j);
  trace.times.push_back(t);
  trace.xi2.push_back(squeezing_parameter(m, n_s));
  trace.moments.push_back(m);
  const int idx = static_cast<int>(trace.times.size()) - 1;
  if (idx % trace.checkpoint_stride == 0 ||
      idx == 0)
    trace.checkpoints.emplace_back(idx, psi);
}

std::string csv_trace(const SqueezingTrace& trace) {
  std::ostringstream out;
  out << "t,xi2,Sx,Sy,Sz,VarMin,VarMax\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& m = trace.moments[i];
    const auto [lo, hi] = m.perpendicular_variances();
    out << format_double(trace.times[i]) << ',' << format_double(trace.xi2[i])
        << ',' << format_double(m.mean[0]) << ',' << format_double(m.mean[1])
        << ',' << format_double(m.mean[2]) << ',' << format_double(lo) << ','
        << format_double(hi) << '\n';
  }
  return out.str();
}

json manifest_json(const ExperimentConfig& cfg, double wall_ms) {
  return json{{"config", cfg.to_json()},
              {"version", version_string()},
              {"wall_ms", wall_ms},
              {"deterministic", cfg.deterministic},
              {"resolved",
               {{"horizon", cfg.resolved_horizon()},
                {"dt", scheme_is_pulsed(cfg.scheme) ? cfg.resolved_dt() : 0.0},
                {"predicted_t_min", cfg.predicted_t_min()},
                {"threads", cfg.resolved_threads()}}}};
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) fail(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) fail(ErrorCode::io, "atomic rename to " + path + " failed: " + ec.message());
}

// ---------------------------------------------------------------------------
// run_trace

namespace {

struct PulsePlan {
  PulseSequence nominal;
  PulseSequence executed;  // perturbed when noise is active
  bool noisy = false;
};

PulsePlan plan_pulses(const ExperimentConfig& cfg, double horizon) {
  const double dt = cfg.resolved_dt();
  PulsePlan plan;
  if (cfg.scheme == Scheme::echo) {
    int n_pulses = 2 * static_cast<int>(std::ceil(horizon / (2.0 * dt)));
    n_pulses = std::max(2, n_pulses);
    plan.nominal = echo_sequence(n_pulses, dt);
  } else {
    int n_periods = static_cast<int>(std::ceil(horizon / (6.0 * dt)));
    n_periods = std::max(1, n_periods);
    plan.nominal = tat_sequence(n_periods, dt);
  }
  plan.noisy = cfg.noise.sigma_area > 0 || cfg.noise.sigma_sep > 0;
  plan.executed = plan.noisy ? perturb_sequence(plan.nominal, cfg.noise)
                             : plan.nominal;
  return plan;
}

}  // namespace

TraceResult run_trace(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  if (!scheme_is_pulsed(cfg.scheme) &&
      (cfg.noise.sigma_area > 0 || cfg.noise.sigma_sep > 0))
    fail(ErrorCode::invalid_argument,
         "pulse noise applies to pulsed schemes only");

  BuiltModel model = build_model(cfg);
  check_budget(cfg, model);

  TraceResult result;
  SqueezingTrace& trace = result.trace;
  trace.scheme = scheme_name(cfg.scheme);

  double horizon = cfg.resolved_horizon();
  json pulse_json;

  if (cfg.samples == 0 || horizon == 0.0) {
    append_sample(trace, 0.0, model.psi0, cfg.n_s, model.dim_j);
    result.optimal = {0.0, trace.xi2[0]};
    result.bracketed = false;
  } else if (scheme_is_pulsed(cfg.scheme)) {
    PulsePlan plan = plan_pulses(cfg, horizon);
    trace = apply_sequence(*model.h, model.psi0, plan.executed,
                           SpinSystem(cfg.n_s, cfg.n_j), cfg.prop);
    pulse_json = json{{"nominal_segments", plan.nominal.segments.size()},
                      {"pi_pulses", plan.nominal.count_rotations(M_PI)},
                      {"noisy", plan.noisy},
                      {"clamp_events", plan.executed.clamp_events},
                      {"dt", cfg.resolved_dt()},
                      {"period", plan.nominal.period}};
    // stroboscopic minimum, with horizon extension by whole sequences
    for (int ext = 0;; ++ext) {
      try {
        result.optimal = find_optimal_squeezing(trace);
        result.bracketed = true;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_bracketed) throw;
        const bool can_extend = !plan.noisy && ext < cfg.max_horizon_extensions &&
                                trace.size() >= 2 &&
                                trace.xi2.back() <= trace.xi2.front();
        if (!can_extend) {
          const auto it = std::min_element(trace.xi2.begin(), trace.xi2.end());
          result.optimal = {trace.times[static_cast<std::size_t>(
                                it - trace.xi2.begin())],
                            *it};
          result.bracketed = false;
          break;
        }
        result.extensions = ext + 1;
        const double extra = 0.5 * horizon;
        PulsePlan more = plan_pulses(cfg, extra);
        // continue from the final state (always checkpointed)
        const Vec& last_state = trace.checkpoints.back().second;
        const double t0 = trace.times.back();
        SqueezingTrace cont = apply_sequence(*model.h, last_state, more.executed,
                                             SpinSystem(cfg.n_s, cfg.n_j), cfg.prop);
        for (std::size_t i = 1; i < cont.size(); ++i) {
          trace.times.push_back(cont.times[i] + t0);
          trace.xi2.push_back(cont.xi2[i]);
          trace.moments.push_back(cont.moments[i]);
        }
        trace.checkpoints.emplace_back(static_cast<int>(trace.size()) - 1,
                                       cont.checkpoints.empty()
                                           ? last_state
                                           : cont.checkpoints.back().second);
        horizon += extra;
      }
    }
    // keep a checkpoint of the final state for continuations
  } else {
    // continuous free evolution over an equispaced grid
    trace.checkpoint_stride = 32;
    EvolveWorkspace ws;
    Vec psi = model.psi0;
    append_sample(trace, 0.0, psi, cfg.n_s, model.dim_j);
    double max_tail = 0.0;
    auto advance_to = [&](double target) {
      const double dt = target - trace.times.back();
      psi = evolve(*model.h, psi, dt, cfg.prop, &ws);
      append_sample(trace, target, psi, cfg.n_s, model.dim_j);
      if (model.monitor_tail) {
        const double tail = hp_tail_population(psi, cfg.n_s, cfg.boson);
        max_tail = std::max(max_tail, tail);
        if (tail > cfg.boson.tail_threshold)
          fail(ErrorCode::numerical,
               "boson truncation tail population " + std::to_string(tail) +
                   " exceeds threshold " + std::to_string(cfg.boson.tail_threshold) +
                   " at t = " + std::to_string(target) +
                   "; raise the cutoff n_max");
      }
    };
    for (int k = 1; k <= cfg.samples; ++k)
      advance_to(horizon * k / cfg.samples);

    const double step = horizon / cfg.samples;
    for (int ext = 0;; ++ext) {
      try {
        // golden-section refinement re-simulates from the bracket start
        const auto coarse = find_optimal_squeezing(trace);
        const auto it = std::min_element(trace.xi2.begin(), trace.xi2.end());
        const std::size_t imin = static_cast<std::size_t>(it - trace.xi2.begin());
        const double bracket_lo = trace.times[imin - 1];
        const int ck = trace.nearest_checkpoint_at_or_before(bracket_lo);
        Vec base = trace.checkpoints[static_cast<std::size_t>(ck)].second;
        const double t_ck =
            trace.times[static_cast<std::size_t>(trace.checkpoints[static_cast<std::size_t>(ck)].first)];
        base = evolve(*model.h, base, bracket_lo - t_ck, cfg.prop, &ws);
        auto resim = [&](double t) {
          const Vec st = evolve(*model.h, base, t - bracket_lo, cfg.prop, &ws);
          return squeezing_parameter(st, cfg.n_s, model.dim_j);
        };
        result.optimal = find_optimal_squeezing(trace, resim);
        if (result.optimal.xi2_min > coarse.xi2_min)
          result.optimal = coarse;
        result.bracketed = true;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_bracketed) throw;
        const bool decreasing = trace.size() >= 2 && trace.xi2.back() <= trace.xi2.front();
        if (ext >= cfg.max_horizon_extensions || !decreasing) {
          const auto it = std::min_element(trace.xi2.begin(), trace.xi2.end());
          result.optimal = {trace.times[static_cast<std::size_t>(it - trace.xi2.begin())], *it};
          result.bracketed = false;
          break;
        }
        result.extensions = ext + 1;
        const int extra_steps = std::max(1, cfg.samples / 2);
        for (int k = 1; k <= extra_steps; ++k)
          advance_to(trace.times.back() + step);
        horizon = trace.times.back();
      }
    }
    if (model.monitor_tail) pulse_json = json{{"max_tail_population", max_tail}};
  }

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  result.summary = json{
      {"scheme", scheme_name(cfg.scheme)},
      {"t_min", result.optimal.t_min},
      {"xi2_min", result.optimal.xi2_min},
      {"bracketed", result.bracketed},
      {"horizon_extensions", result.extensions},
      {"samples", trace.size()},
      {"manifest", manifest_json(cfg, wall_ms)},
  };
  if (cfg.scheme == Scheme::free_fn_hp)
    result.summary["h_fn_realization"] = "hp-truncated";
  if (!pulse_json.is_null()) result.summary["pulses"] = pulse_json;

  if (!cfg.output_prefix.empty()) {
    write_file_atomic(cfg.output_prefix + ".trace.csv", csv_trace(trace));
    write_file_atomic(cfg.output_prefix + ".summary.json",
                      result.summary.dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------
// run_scaling

ScalingResult run_scaling(const ExperimentConfig& base, SweepKind kind,
                          std::span<const double> values) {
  base.validate();
  if (values.size() < 4)
    fail(ErrorCode::invalid_argument,
         "run_scaling needs at least 4 sweep values for a fit");
  const auto t_start = std::chrono::steady_clock::now();
  const double ratio = static_cast<double>(base.n_j) / base.n_s;

  ScalingResult result;
  result.points.resize(values.size());
  parallel_for(
      static_cast<int>(values.size()), base.resolved_threads(), [&](int i) {
        ScalingPoint& pt = result.points[static_cast<std::size_t>(i)];
        pt.value = values[static_cast<std::size_t>(i)];
        ExperimentConfig cfg = base;
        cfg.output_prefix.clear();
        cfg.threads = 1;
        try {
          if (kind == SweepKind::over_n_s) {
            cfg.n_s = static_cast<int>(std::lround(pt.value));
            cfg.n_j = std::max(1, static_cast<int>(std::lround(ratio * cfg.n_s)));
          } else {
            cfg.n_j = std::max(1, static_cast<int>(std::lround(pt.value * cfg.n_s)));
          }
          const TraceResult tr = run_trace(cfg);
          if (!tr.bracketed)
            fail(ErrorCode::not_bracketed, "minimum not bracketed");
          pt.optimal = tr.optimal;
          pt.ok = true;
        } catch (const std::exception& e) {
          pt.ok = false;
          pt.error = e.what();
        }
      });

  std::vector<double> xs, xi2s, tmins;
  for (const auto& pt : result.points)
    if (pt.ok) {
      xs.push_back(pt.value);
      xi2s.push_back(pt.optimal.xi2_min);
      tmins.push_back(pt.optimal.t_min);
    }
  if (xs.size() < 4)
    fail(ErrorCode::numerical,
         "run_scaling: only " + std::to_string(xs.size()) +
             " sweep points survived; need 4 for the fit");
  if (kind == SweepKind::over_n_s) {
    result.fit_xi2 = fit_power_law(xs, xi2s);
    result.fit_tmin = fit_power_law(xs, tmins);
  }

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  json points = json::array();
  for (const auto& pt : result.points)
    points.push_back(json{{"value", pt.value},
                          {"xi2_min", pt.optimal.xi2_min},
                          {"t_min", pt.optimal.t_min},
                          {"ok", pt.ok},
                          {"error", pt.error}});
  result.summary = json{{"sweep", kind == SweepKind::over_n_s ? "n_s" : "ratio"},
                        {"points", points},
                        {"manifest", manifest_json(base, wall_ms)}};
  auto fit_json = [](const FitResult& f) {
    return json{{"exponent", f.exponent}, {"prefactor", f.prefactor},
                {"r_squared", f.r_squared}, {"n_points", f.n_points}};
  };
  if (result.fit_xi2) result.summary["fit_xi2_min"] = fit_json(*result.fit_xi2);
  if (result.fit_tmin) result.summary["fit_t_min"] = fit_json(*result.fit_tmin);

  if (!base.output_prefix.empty()) {
    std::ostringstream csv;
    csv << "value,n_s,n_j,xi2_min,t_min,ok\n";
    for (const auto& pt : result.points) {
      const int ns = kind == SweepKind::over_n_s
                         ? static_cast<int>(std::lround(pt.value))
                         : base.n_s;
      const int nj = kind == SweepKind::over_n_s
                         ? static_cast<int>(std::lround(ratio * ns))
                         : static_cast<int>(std::lround(pt.value * base.n_s));
      csv << format_double(pt.value) << ',' << ns << ',' << nj << ','
          << format_double(pt.optimal.xi2_min) << ','
          << format_double(pt.optimal.t_min) << ',' << (pt.ok ? 1 : 0) << '\n';
    }
    write_file_atomic(base.output_prefix + ".scaling.csv", csv.str());
    write_file_atomic(base.output_prefix + ".scaling.json",
                      result.summary.dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------
// run_noise_mc

NoiseResult run_noise_mc(const ExperimentConfig& cfg,
                         std::span<const std::pair<double, double>> grid,
                         int trajectories) {
  cfg.validate();
  if (!scheme_is_pulsed(cfg.scheme))
    fail(ErrorCode::invalid_argument, "noise analysis requires a pulsed scheme");
  if (trajectories < 1)
    fail(ErrorCode::invalid_argument, "trajectories must be >= 1");
  if (grid.empty()) fail(ErrorCode::invalid_argument, "noise grid is empty");
  const auto t_start = std::chrono::steady_clock::now();

  // nominal (noise-free) reference
  ExperimentConfig nominal_cfg = cfg;
  nominal_cfg.noise = NoiseSpec{};
  nominal_cfg.output_prefix.clear();
  nominal_cfg.threads = 1;
  const TraceResult nominal = run_trace(nominal_cfg);

  NoiseResult result;
  result.nominal = nominal.optimal;
  result.cells.resize(grid.size());

  struct Job {
    int cell;
    int traj;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < grid.size(); ++c)
    for (int k = 0; k < trajectories; ++k)
      jobs.push_back({static_cast<int>(c), k});

  const std::size_t n_times = nominal.trace.size();
  std::vector<std::vector<std::vector<double>>> curves(
      grid.size(), std::vector<std::vector<double>>(
                       static_cast<std::size_t>(trajectories)));
  std::vector<std::vector<OptimalSqueezing>> optima(
      grid.size(),
      std::vector<OptimalSqueezing>(static_cast<std::size_t>(trajectories)));
  std::vector<std::vector<std::uint64_t>> seeds(
      grid.size(),
      std::vector<std::uint64_t>(static_cast<std::size_t>(trajectories)));

  parallel_for(static_cast<int>(jobs.size()), cfg.resolved_threads(), [&](int idx) {
    const Job job = jobs[static_cast<std::size_t>(idx)];
    const auto [sa, ss] = grid[static_cast<std::size_t>(job.cell)];
    ExperimentConfig tcfg = cfg;
    tcfg.output_prefix.clear();
    tcfg.threads = 1;
    tcfg.max_horizon_extensions = 0;
    tcfg.noise.sigma_area = sa;
    tcfg.noise.sigma_sep = ss;
    tcfg.noise.seed =
        derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(job.cell)),
                    static_cast<std::uint64_t>(job.traj));
    seeds[static_cast<std::size_t>(job.cell)][static_cast<std::size_t>(job.traj)] =
        tcfg.noise.seed;
    const TraceResult tr = run_trace(tcfg);
    curves[static_cast<std::size_t>(job.cell)][static_cast<std::size_t>(job.traj)] =
        tr.trace.xi2;
    optima[static_cast<std::size_t>(job.cell)][static_cast<std::size_t>(job.traj)] =
        tr.optimal;
  });

  json cells_json = json::array();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    NoiseCell& cell = result.cells[c];
    cell.sigma_area = grid[c].first;
    cell.sigma_sep = grid[c].second;
    cell.seeds = seeds[c];
    for (int k = 0; k < trajectories; ++k) {
      cell.xi2_min.push_back(optima[c][static_cast<std::size_t>(k)].xi2_min);
      cell.t_of_min.push_back(optima[c][static_cast<std::size_t>(k)].t_min);
    }
    // pointwise statistics across trajectories, indexed by period boundary
    cell.times = nominal.trace.times;
    cell.mean.assign(n_times, 0.0);
    cell.stddev.assign(n_times, 0.0);
    cell.min.assign(n_times, 0.0);
    cell.max.assign(n_times, 0.0);
    for (std::size_t i = 0; i < n_times; ++i) {
      double lo = 1e300, hi = -1e300, sum = 0, sum2 = 0;
      int count = 0;
      for (int k = 0; k < trajectories; ++k) {
        const auto& curve = curves[c][static_cast<std::size_t>(k)];
        if (i >= curve.size()) continue;
        const double v = curve[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        sum2 += v * v;
        ++count;
      }
      if (count == 0) continue;
      cell.mean[i] = sum / count;
      cell.stddev[i] =
          count > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / count) / (count - 1)))
                    : 0.0;
      cell.min[i] = lo;
      cell.max[i] = hi;
    }
    double msum = 0, msum2 = 0;
    for (const double v : cell.xi2_min) {
      msum += v;
      msum2 += v * v;
    }
    cell.xi2_min_mean = msum / trajectories;
    cell.xi2_min_std =
        trajectories > 1
            ? std::sqrt(std::max(0.0, (msum2 - msum * msum / trajectories) /
                                          (trajectories - 1)))
            : 0.0;

    cells_json.push_back(json{{"sigma_area", cell.sigma_area},
                              {"sigma_sep", cell.sigma_sep},
                              {"xi2_min_mean", cell.xi2_min_mean},
                              {"xi2_min_std", cell.xi2_min_std},
                              {"xi2_min", cell.xi2_min},
                              {"t_of_min", cell.t_of_min},
                              {"seeds", cell.seeds}});
  }

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  result.summary = json{{"nominal",
                         {{"xi2_min", result.nominal.xi2_min},
                          {"t_min", result.nominal.t_min}}},
                        {"trajectories", trajectories},
                        {"cells", cells_json},
                        {"manifest", manifest_json(cfg, wall_ms)}};

  if (!cfg.output_prefix.empty()) {
    std::ostringstream csv;
    csv << "cell,sigma_area,sigma_sep,t,mean,std,min,max\n";
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
      const auto& cell = result.cells[c];
      for (std::size_t i = 0; i < cell.times.size(); ++i)
        csv << c << ',' << format_double(cell.sigma_area) << ','
            << format_double(cell.sigma_sep) << ',' << format_double(cell.times[i])
            << ',' << format_double(cell.mean[i]) << ','
            << format_double(cell.stddev[i]) << ',' << format_double(cell.min[i])
            << ',' << format_double(cell.max[i]) << '\n';
    }
    write_file_atomic(cfg.output_prefix + ".noise.csv", csv.str());
    write_file_atomic(cfg.output_prefix + ".noise.json",
                      result.summary.dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------
// run_husimi

HusimiResult run_husimi(const ExperimentConfig& cfg,
                        std::span<const double> times) {
  cfg.validate();
  if (scheme_is_pulsed(cfg.scheme))
    fail(ErrorCode::invalid_argument,
         "husimi snapshots are defined for the free-evolution schemes");
  const auto t_start = std::chrono::steady_clock::now();

  HusimiResult result;
  std::vector<double> snapshot_times(times.begin(), times.end());
  if (snapshot_times.empty()) {
    ExperimentConfig tcfg = cfg;
    tcfg.output_prefix.clear();
    const TraceResult tr = run_trace(tcfg);
    result.optimal = tr.optimal;
    for (const double f : {0.25, 0.5, 0.75, 1.0})
      snapshot_times.push_back(f * tr.optimal.t_min);
  }
  for (const double t : snapshot_times)
    if (t < 0) fail(ErrorCode::invalid_argument, "snapshot times must be >= 0");

  BuiltModel model = build_model(cfg);
  check_budget(cfg, model);

  json snaps_json = json::array();
  Vec psi = model.psi0;
  double t_now = 0.0;
  EvolveWorkspace ws;
  std::vector<double> sorted = snapshot_times;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double t = sorted[k];
    if (t > t_now) psi = evolve(*model.h, psi, t - t_now, cfg.prop, &ws);
    t_now = t;

    HusimiSnapshot snap;
    snap.t = t;
    Mat rho;
    if (model.dim_j > 1) {
      SpinSystem sys(cfg.n_s, static_cast<int>(model.dim_j) - 1);
      rho = reduced_density_s(psi, sys);
    } else {
      rho = psi * psi.adjoint();
    }
    snap.grid = husimi_q(rho);
    const auto m = collective_moments(psi, cfg.n_s, model.dim_j);
    snap.mean_spin = m.mean;
    const auto [lo, hi] = m.perpendicular_variances();
    snap.aspect_ratio = lo > 0 ? std::sqrt(hi / lo) : 0.0;

    snaps_json.push_back(json{{"t", t},
                              {"mean_spin", {m.mean[0], m.mean[1], m.mean[2]}},
                              {"aspect_ratio", snap.aspect_ratio},
                              {"integral", snap.grid.sphere_integral()}});

    if (!cfg.output_prefix.empty()) {
      std::ostringstream csv;
      for (Eigen::Index i = 0; i < snap.grid.q.rows(); ++i) {
        for (Eigen::Index jn = 0; jn < snap.grid.q.cols(); ++jn)
          csv << (jn ? "," : "") << format_double(snap.grid.q(i, jn));
        csv << '\n';
      }
      const std::string stem =
          cfg.output_prefix + ".husimi_" + std::to_string(k);
      write_file_atomic(stem + ".csv", csv.str());
      json sidecar{{"t", t},
                   {"n_s", cfg.n_s},
                   {"normalization", "(2S+1)/(4pi) <css|rho|css>"},
                   {"mean_spin", {m.mean[0], m.mean[1], m.mean[2]}},
                   {"aspect_ratio", snap.aspect_ratio},
                   {"sphere_integral", snap.grid.sphere_integral()},
                   {"theta", std::vector<double>(snap.grid.theta.begin(),
                                                 snap.grid.theta.end())},
                   {"theta_weight",
                    std::vector<double>(snap.grid.theta_weight.begin(),
                                        snap.grid.theta_weight.end())},
                   {"phi", std::vector<double>(snap.grid.phi.begin(),
                                               snap.grid.phi.end())}};
      write_file_atomic(stem + ".json", sidecar.dump(2) + "\n");
    }
    result.snapshots.push_back(std::move(snap));
  }

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  result.summary = json{{"snapshots", snaps_json},
                        {"t_min", result.optimal.t_min},
                        {"xi2_min", result.optimal.xi2_min},
                        {"manifest", manifest_json(cfg, wall_ms)}};
  if (!cfg.output_prefix.empty())
    write_file_atomic(cfg.output_prefix + ".husimi.json",
                      result.summary.dump(2) + "\n");
  return result;
}

json VerifyReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks)
    checks_json.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return json{{"all_pass", all_pass}, {"checks", checks_json}};
}

}  // namespace ssq
