#include "spinsqueeze.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "spinsqueeze/experiments.hpp"

using namespace ssq;
using nlohmann::json;

namespace {

thread_local std::string g_last_error;
thread_local int g_last_code = SSQ_OK;

void set_error(int code, const std::string& message) {
  g_last_code = code;
  g_last_error = message;
}

int code_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid_argument: return SSQ_ERR_INVALID_ARGUMENT;
    case ErrorCode::budget: return SSQ_ERR_BUDGET;
    case ErrorCode::numerical: return SSQ_ERR_NUMERICAL;
    case ErrorCode::io: return SSQ_ERR_IO;
    case ErrorCode::not_bracketed: return SSQ_ERR_NOT_BRACKETED;
  }
  return SSQ_ERR_INTERNAL;
}

template <typename Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    g_last_code = SSQ_OK;
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    set_error(code_of(e), e.what());
  } catch (const std::exception& e) {
    set_error(SSQ_ERR_INTERNAL, e.what());
  } catch (...) {
    set_error(SSQ_ERR_INTERNAL, "unknown error");
  }
  return decltype(fn()){};
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

PropagatorConfig propagator_from_json(const char* text) {
  PropagatorConfig cfg;
  if (!text || !*text) return cfg;
  const json j = json::parse(text);
  cfg.krylov_dim = j.value("krylov_dim", cfg.krylov_dim);
  cfg.step_tol = j.value("step_tol", cfg.step_tol);
  cfg.max_substeps = j.value("max_substeps", cfg.max_substeps);
  cfg.dense_threshold = j.value("dense_threshold", cfg.dense_threshold);
  cfg.validate();
  return cfg;
}

}  // namespace

struct ssq_operator {
  SparseHermitianOperator op;
};

struct ssq_state {
  Vec v;
};

extern "C" {

const char* ssq_version(void) { return version_string(); }

const char* ssq_last_error(void) { return g_last_error.c_str(); }

int ssq_last_error_code(void) { return g_last_code; }

ssq_state* ssq_state_css(int n, double theta, double phi) {
  return guarded([&]() -> ssq_state* {
    return new ssq_state{css(n, theta, phi)};
  });
}

ssq_state* ssq_state_product_css(int n_s, int n_j, double theta_s,
                                 double phi_s, double theta_j, double phi_j) {
  return guarded([&]() -> ssq_state* {
    const SpinSystem sys(n_s, n_j);
    return new ssq_state{product_css(sys, theta_s, phi_s, theta_j, phi_j)};
  });
}

ssq_state* ssq_state_clone(const ssq_state* state) {
  return guarded([&]() -> ssq_state* {
    if (!state) fail(ErrorCode::invalid_argument, "null state");
    return new ssq_state{state->v};
  });
}

void ssq_state_free(ssq_state* state) { delete state; }

int64_t ssq_state_dim(const ssq_state* state) {
  return state ? static_cast<int64_t>(state->v.size()) : 0;
}

int ssq_state_amplitudes(const ssq_state* state, double* re, double* im,
                         int64_t len) {
  return guarded([&]() -> int {
    if (!state || !re || !im) fail(ErrorCode::invalid_argument, "null argument");
    if (len != state->v.size())
      fail(ErrorCode::invalid_argument, "buffer length mismatch");
    for (int64_t i = 0; i < len; ++i) {
      re[i] = state->v[i].real();
      im[i] = state->v[i].imag();
    }
    return SSQ_OK;
  });
}

ssq_operator* ssq_build_h_int(int n_s, int n_j, double gx, double gy,
                              double gz) {
  return guarded([&]() -> ssq_operator* {
    return new ssq_operator{
        build_h_int(CouplingParams{gx, gy, gz}, SpinSystem(n_s, n_j))};
  });
}

ssq_operator* ssq_build_h_oat(int n_s, double gx, double gy, double gz) {
  return guarded([&]() -> ssq_operator* {
    return new ssq_operator{build_h_oat(CouplingParams{gx, gy, gz}, n_s)};
  });
}

ssq_operator* ssq_build_h_eff(int n_s, int n_j, double gx, double gy,
                              double gz) {
  return guarded([&]() -> ssq_operator* {
    return new ssq_operator{
        build_h_eff(CouplingParams{gx, gy, gz}, SpinSystem(n_s, n_j))};
  });
}

ssq_operator* ssq_build_h_tat(int n_s, double gx, double gy, double gz) {
  return guarded([&]() -> ssq_operator* {
    return new ssq_operator{build_h_tat(CouplingParams{gx, gy, gz}, n_s)};
  });
}

void ssq_operator_free(ssq_operator* op) { delete op; }

int64_t ssq_operator_dim(const ssq_operator* op) {
  return op ? static_cast<int64_t>(op->op.dim()) : 0;
}

int64_t ssq_operator_nnz(const ssq_operator* op) {
  return op ? static_cast<int64_t>(op->op.nnz()) : 0;
}

int ssq_evolve(const ssq_operator* h, ssq_state* psi, double t,
               const char* propagator_json) {
  return guarded([&]() -> int {
    if (!h || !psi) fail(ErrorCode::invalid_argument, "null argument");
    psi->v = evolve(h->op, psi->v, t, propagator_from_json(propagator_json));
    return SSQ_OK;
  });
}

int ssq_rotate_s(ssq_state* psi, int n_s, int64_t dim_j, const char* axis,
                 double angle) {
  return guarded([&]() -> int {
    if (!psi || !axis) fail(ErrorCode::invalid_argument, "null argument");
    if (dim_j < 1 || psi->v.size() != static_cast<Eigen::Index>(n_s + 1) * dim_j)
      fail(ErrorCode::invalid_argument, "state dimension mismatch");
    const Mat u = rotation_dense(n_s, axis_from_name(axis), angle);
    using RowMat =
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat> m(psi->v.data(), n_s + 1, dim_j);
    m = u * m;
    return SSQ_OK;
  });
}

int ssq_moments(const ssq_state* psi, int n_s, int64_t dim_j,
                double out_mean[3], double out_second[9]) {
  return guarded([&]() -> int {
    if (!psi || !out_mean || !out_second)
      fail(ErrorCode::invalid_argument, "null argument");
    const auto m = collective_moments(psi->v, n_s, dim_j);
    for (int a = 0; a < 3; ++a) {
      out_mean[a] = m.mean[a];
      for (int b = 0; b < 3; ++b) out_second[3 * a + b] = m.second(a, b);
    }
    return SSQ_OK;
  });
}

int ssq_squeezing_parameter(const ssq_state* psi, int n_s, int64_t dim_j,
                            double* out_xi2) {
  return guarded([&]() -> int {
    if (!psi || !out_xi2) fail(ErrorCode::invalid_argument, "null argument");
    *out_xi2 = squeezing_parameter(psi->v, n_s, dim_j);
    return SSQ_OK;
  });
}

char* ssq_run_experiment(const char* config_json) {
  return guarded([&]() -> char* {
    if (!config_json) fail(ErrorCode::invalid_argument, "null config");
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::invalid_argument, std::string("config parse error: ") + e.what());
    }
    const std::string task = j.value("task", "trace");
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);

    json summary;
    if (task == "trace") {
      summary = run_trace(cfg).summary;
    } else if (task == "scaling") {
      if (!j.contains("values"))
        fail(ErrorCode::invalid_argument, "scaling task needs \"values\"");
      const std::vector<double> values = j.at("values").get<std::vector<double>>();
      const SweepKind kind = j.value("sweep", std::string("n_s")) == "ratio"
                                 ? SweepKind::over_ratio
                                 : SweepKind::over_n_s;
      summary = run_scaling(cfg, kind, values).summary;
    } else if (task == "noise") {
      std::vector<std::pair<double, double>> grid;
      for (const auto& cell : j.value("grid", json::array()))
        grid.emplace_back(cell.at(0).get<double>(), cell.at(1).get<double>());
      if (grid.empty()) grid = {{0.0, 0.0}};
      const int traj = j.value("trajectories", 20);
      summary = run_noise_mc(cfg, grid, traj).summary;
    } else if (task == "husimi") {
      std::vector<double> times = j.value("times", std::vector<double>{});
      summary = run_husimi(cfg, times).summary;
    } else {
      fail(ErrorCode::invalid_argument, "unknown task '" + task + "'");
    }
    return dup_string(summary.dump(2));
  });
}

char* ssq_run_verify(int* out_all_pass) {
  return guarded([&]() -> char* {
    const VerifyReport report = run_verify();
    if (out_all_pass) *out_all_pass = report.all_pass ? 1 : 0;
    return dup_string(report.to_json().dump(2));
  });
}

void ssq_string_free(char* s) { std::free(s); }

}  // extern "C"
