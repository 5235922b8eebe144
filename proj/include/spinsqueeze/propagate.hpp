#pragma once

#include <functional>
#include <span>

#include "spinsqueeze/sparse.hpp"
#include "spinsqueeze/types.hpp"

namespace ssq {

struct PropagatorConfig {
  int krylov_dim = 30;
  double step_tol = 1e-10;       // local error budget per substep
  long max_substeps = 2'000'000;
  Eigen::Index dense_threshold = 512;
  bool parallel_matvec = false;  // row-partitioned; off = strictly serial
  int threads = 2;               // used only when parallel_matvec is set

  void validate() const;
};

// Per-evolution diagnostics; also carries the accepted step size across
// calls so segmented evolutions (sampling, pulse sequences) do not pay the
// step-discovery cost repeatedly.
struct EvolveWorkspace {
  double tau_hint = 0.0;
  long matvecs = 0;
  long substeps = 0;
  double max_local_err = 0.0;
};

// Lanczos (Hermitian Krylov) approximation to exp(-i H t) psi with
// residual-based adaptive substepping and happy-breakdown detection.
// Requires a hermitian-flagged operator and a unit-norm state; the result
// is renormalized only if the norm drift stayed below 1e-8.
Vec evolve(const LinearOperator& h, const Vec& psi, double t,
           const PropagatorConfig& cfg = {}, EvolveWorkspace* ws = nullptr);

// Krylov core without the unit-norm contract; used where exp(-iHt) must act
// on intermediate vectors of arbitrary norm (operator conjugation).
Vec expmv_unnormalized(const LinearOperator& h, const Vec& v, double t,
                       const PropagatorConfig& cfg = {},
                       EvolveWorkspace* ws = nullptr);

enum class DenseMethod { eigh, scaling_squaring };

// Dense brute-force oracle, refused above cfg.dense_threshold.
Vec evolve_dense(const LinearOperator& h, const Vec& psi, double t,
                 const PropagatorConfig& cfg = {},
                 DenseMethod method = DenseMethod::eigh);

// Scaling-and-squaring Pade-13 matrix exponential (general complex).
Mat expm(const Mat& a);

using SampleCallback =
    std::function<void(int index, double t, const Vec& state)>;

// Segment-by-segment evolution through an ascending list of sample times
// (first segment starts at t = 0), invoking the callback at every time.
void evolve_sampled(const LinearOperator& h, const Vec& psi0,
                    std::span<const double> times, const PropagatorConfig& cfg,
                    const SampleCallback& on_sample);

}  // namespace ssq
