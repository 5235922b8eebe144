#include "spinsqueeze/propagate.hpp"

#include <algorithm>
#include <cmath>

namespace ssq {

void PropagatorConfig::validate() const {
  if (krylov_dim < 2) fail(ErrorCode::invalid_argument, "krylov_dim must be >= 2");
  if (step_tol <= 0) fail(ErrorCode::invalid_argument, "step_tol must be positive");
  if (max_substeps < 1) fail(ErrorCode::invalid_argument, "max_substeps must be >= 1");
  if (dense_threshold < 1) fail(ErrorCode::invalid_argument, "dense_threshold must be >= 1");
}

namespace {

void apply_op(const LinearOperator& h, const PropagatorConfig& cfg,
              const Vec& x, Vec& y) {
  if (cfg.parallel_matvec) {
    if (const auto* sp = dynamic_cast<const SparseHermitianOperator*>(&h)) {
      sp->apply_parallel(x, y, cfg.threads);
      return;
    }
  }
  h.apply(x, y);
}

// exp(-i d t) phases for diagonal operators: exact, no stepping.
Vec diagonal_expmv(const RVec& d, const Vec& psi, double t) {
  Vec out(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    out[i] = std::polar(1.0, -d[i] * t) * psi[i];
  return out;
}

}  // namespace

// Norm-agnostic Krylov exponential-multiply core. Lanczos three-term
// recurrence; the local step error is estimated by the classic
// beta * h_{m+1,m} * |last component of exp(-i tau T) e1| heuristic with
// step halving on failure.
static Vec krylov_expmv(const LinearOperator& h, const Vec& psi, double t,
                        const PropagatorConfig& cfg, EvolveWorkspace* ws) {
  const Eigen::Index n = h.dim();
  if (psi.size() != n) fail(ErrorCode::invalid_argument, "evolve: dimension mismatch");
  if (t == 0.0) return psi;
  if (const RVec* d = h.real_diagonal()) return diagonal_expmv(*d, psi, t);

  const int m = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  const double sign = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);

  double tau = (ws && ws->tau_hint > 0)
                   ? ws->tau_hint
                   : std::max(remaining * 1e-12,
                              static_cast<double>(m) / std::max(h.norm_bound(), 1e-300));
  tau = std::min(tau, remaining);

  Vec current = psi;
  Mat basis(n, m);
  RVec alpha(m), beta(m);
  Vec w(n), small(m);
  long substeps = 0;

  while (remaining > 1e-15 * std::abs(t)) {
    if (++substeps > cfg.max_substeps)
      fail(ErrorCode::numerical, "evolve: substep limit exceeded");

    const double norm0 = current.norm();
    if (norm0 == 0.0) return current;  // nothing to evolve
    basis.col(0) = current / norm0;

    int k_used = m;
    bool happy = false;
    double alpha_scale = 1.0;
    for (int k = 0; k < m; ++k) {
      apply_op(h, cfg, basis.col(k), w);
      if (ws) ++ws->matvecs;
      if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
      alpha[k] = std::real(basis.col(k).dot(w));
      w -= alpha[k] * basis.col(k);
      const double b = w.norm();
      beta[k] = b;
      alpha_scale = std::max(alpha_scale, std::abs(alpha[k]));
      if (b < 1e-13 * alpha_scale) {  // invariant subspace: step is exact
        k_used = k + 1;
        happy = true;
        break;
      }
      if (k < m - 1) basis.col(k + 1) = w / b;
    }
    const double h_next = happy ? 0.0 : beta[k_used - 1];

    Eigen::SelfAdjointEigenSolver<RMat> es;
    es.computeFromTridiagonal(alpha.head(k_used), beta.head(k_used - 1));
    const RVec& ritz = es.eigenvalues();
    const RMat& u = es.eigenvectors();

    if (happy) tau = remaining;
    double err = 0.0;
    int halvings = 0;
    for (;;) {
      cplx last{0.0, 0.0};
      for (int i = 0; i < k_used; ++i)
        small[i] = cplx{0.0, 0.0};
      for (int q = 0; q < k_used; ++q) {
        const cplx phase = std::polar(1.0, -sign * tau * ritz[q]);
        const cplx coef = phase * u(0, q);
        for (int i = 0; i < k_used; ++i) small[i] += coef * u(i, q);
      }
      last = small[k_used - 1];
      err = norm0 * h_next * std::abs(last);
      if (happy || err <= cfg.step_tol) break;
      if (++halvings > 60)
        fail(ErrorCode::numerical,
             "evolve: Lanczos step failed to converge (local error " +
                 std::to_string(err) + ")");
      tau *= 0.5;
    }

    current = basis.leftCols(k_used) * (norm0 * small.head(k_used));
    remaining -= tau;
    if (ws) {
      ++ws->substeps;
      ws->max_local_err = std::max(ws->max_local_err, err);
    }
    if (!happy && err < 0.1 * cfg.step_tol) tau *= 1.4;
    if (ws) ws->tau_hint = tau;
    tau = std::min(tau, remaining);
    if (happy) break;
  }
  return current;
}

Vec evolve(const LinearOperator& h, const Vec& psi, double t,
           const PropagatorConfig& cfg, EvolveWorkspace* ws) {
  cfg.validate();
  if (!h.hermitian())
    fail(ErrorCode::invalid_argument, "evolve requires a hermitian-flagged operator");
  if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "evolve: t must be finite");
  if (std::abs(psi.norm() - 1.0) > 1e-6)
    fail(ErrorCode::invalid_argument, "evolve expects a unit-norm state");

  Vec out = krylov_expmv(h, psi, t, cfg, ws);
  const double drift = std::abs(out.norm() - 1.0);
  if (drift > 1e-8)
    fail(ErrorCode::numerical,
         "evolve: norm drift " + std::to_string(drift) + " exceeds 1e-8");
  out /= out.norm();
  return out;
}

Vec expmv_unnormalized(const LinearOperator& h, const Vec& v, double t,
                       const PropagatorConfig& cfg, EvolveWorkspace* ws) {
  return krylov_expmv(h, v, t, cfg, ws);
}

Mat expm(const Mat& a) {
  // Pade-13 with scaling and squaring (Higham 2005).
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) fail(ErrorCode::invalid_argument, "expm: square matrix required");

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  Mat as = a;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    as /= std::ldexp(1.0, squarings);
  }
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                      b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

namespace {

Mat densify(const LinearOperator& h) {
  if (const auto* sp = dynamic_cast<const SparseHermitianOperator*>(&h))
    return sp->to_dense();
  const Eigen::Index n = h.dim();
  Mat a(n, n);
  Vec e = Vec::Zero(n), col(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    e[c] = 1.0;
    h.apply(e, col);
    a.col(c) = col;
    e[c] = 0.0;
  }
  return a;
}

}  // namespace

Vec evolve_dense(const LinearOperator& h, const Vec& psi, double t,
                 const PropagatorConfig& cfg, DenseMethod method) {
  cfg.validate();
  if (h.dim() > cfg.dense_threshold)
    fail(ErrorCode::invalid_argument,
         "evolve_dense refused: dim " + std::to_string(h.dim()) +
             " exceeds dense_threshold " + std::to_string(cfg.dense_threshold));
  if (psi.size() != h.dim())
    fail(ErrorCode::invalid_argument, "evolve_dense: dimension mismatch");

  const Mat a = densify(h);
  if (method == DenseMethod::scaling_squaring)
    return expm(cplx{0.0, -t} * a) * psi;

  if (!h.hermitian())
    fail(ErrorCode::invalid_argument,
         "evolve_dense(eigh) requires a hermitian operator");
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec phases(h.dim());
  for (Eigen::Index i = 0; i < h.dim(); ++i)
    phases[i] = std::polar(1.0, -t * es.eigenvalues()[i]);
  return es.eigenvectors() *
         (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi));
}

void evolve_sampled(const LinearOperator& h, const Vec& psi0,
                    std::span<const double> times, const PropagatorConfig& cfg,
                    const SampleCallback& on_sample) {
  if (times.empty()) return;
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < prev || (i > 0 && times[i] < times[i - 1]))
      fail(ErrorCode::invalid_argument,
           "evolve_sampled: times must ascend and start at >= 0");
    prev = times[i];
  }
  EvolveWorkspace ws;
  Vec psi = psi0;
  double t = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - t;
    if (dt > 0) psi = evolve(h, psi, dt, cfg, &ws);
    t = times[i];
    on_sample(static_cast<int>(i), t, psi);
  }
}

}  // namespace ssq
