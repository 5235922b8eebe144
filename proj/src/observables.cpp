#include "spinsqueeze/observables.hpp"

#include <algorithm>
#include <cmath>

namespace ssq {

namespace {

using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;

// W = op * M with op a small (dim_s x dim_s) CSR acting on the S index of
// the row-major reshaped product state.
void apply_left(const SparseHermitianOperator& op, const ConstMap& m,
                RowMat& w) {
  w.setZero(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < op.dim(); ++r)
    for (auto k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k)
      w.row(r) += op.values()[static_cast<std::size_t>(k)] *
                  m.row(op.cols()[static_cast<std::size_t>(k)]);
}

}  // namespace

CollectiveMoments collective_moments(const Vec& psi, int n_s,
                                     Eigen::Index dim_j) {
  const Eigen::Index dim_s = n_s + 1;
  if (dim_j < 1 || psi.size() != dim_s * dim_j)
    fail(ErrorCode::invalid_argument,
         "collective_moments: state dimension " + std::to_string(psi.size()) +
             " does not match (n_s+1) * dim_j");
  const auto s = spin_matrices(n_s);
  const SparseHermitianOperator* ops[3] = {&s.sx, &s.sy, &s.sz};

  ConstMap m(psi.data(), dim_s, dim_j);
  RowMat w[3];
  CollectiveMoments out;
  for (int a = 0; a < 3; ++a) {
    apply_left(*ops[a], m, w[a]);
    out.mean[a] = (m.conjugate().cwiseProduct(w[a])).sum().real();
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      // <(AB + BA)/2> = Re <A psi, B psi> for hermitian A, B
      const double v = (w[a].conjugate().cwiseProduct(w[b])).sum().real();
      out.second(a, b) = v;
      out.second(b, a) = v;
    }
  return out;
}

std::pair<double, double> CollectiveMoments::perpendicular_variances() const {
  const double norm = mean.norm();
  if (norm < 1e-300)
    fail(ErrorCode::numerical,
         "perpendicular variances undefined: mean spin direction degenerate");
  const Eigen::Vector3d mu = mean / norm;
  Eigen::Vector3d ref =
      std::abs(mu.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  Eigen::Vector3d e1 = mu.cross(ref).normalized();
  Eigen::Vector3d e2 = mu.cross(e1);

  const Eigen::Matrix3d cov = second - mean * mean.transpose();
  const double c11 = e1.dot(cov * e1);
  const double c22 = e2.dot(cov * e2);
  const double c12 = e1.dot(cov * e2);
  const double half_tr = 0.5 * (c11 + c22);
  const double radius = std::hypot(0.5 * (c11 - c22), c12);
  return {half_tr - radius, half_tr + radius};
}

double squeezing_parameter(const CollectiveMoments& m, int n_s) {
  if (n_s < 1) fail(ErrorCode::invalid_argument, "squeezing_parameter: n_s >= 1");
  if (m.mean.norm() < 1e-9 * n_s)
    fail(ErrorCode::numerical,
         "squeezing parameter undefined: |<S>| = " + std::to_string(m.mean.norm()) +
             " below 1e-9 * n_s");
  return 4.0 * m.perpendicular_variances().first / n_s;
}

double squeezing_parameter(const Vec& psi, int n_s, Eigen::Index dim_j) {
  return squeezing_parameter(collective_moments(psi, n_s, dim_j), n_s);
}

Mat reduced_density_s(const Vec& psi, const SpinSystem& sys) {
  if (psi.size() != sys.total_dim())
    fail(ErrorCode::invalid_argument, "reduced_density_s: dimension mismatch");
  ConstMap m(psi.data(), sys.dim_s(), sys.dim_j());
  return m * m.adjoint();
}

void gauss_legendre(int n, RVec& nodes, RVec& weights) {
  if (n < 1) fail(ErrorCode::invalid_argument, "gauss_legendre: n >= 1");
  // Golub-Welsch: Jacobi matrix of the Legendre recurrence.
  RVec diag = RVec::Zero(n);
  RVec sub(std::max(0, n - 1));
  for (int k = 1; k < n; ++k)
    sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<RMat> es;
  es.computeFromTridiagonal(diag, sub);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v * v;
  }
}

HusimiGrid husimi_q(const Mat& rho, int n_theta, int n_phi) {
  const Eigen::Index dim = rho.rows();
  if (rho.cols() != dim || dim < 2)
    fail(ErrorCode::invalid_argument, "husimi_q: invalid density matrix");
  if (n_theta < 2 || n_phi < 2)
    fail(ErrorCode::invalid_argument, "husimi_q: grid too small");
  const int n = static_cast<int>(dim) - 1;

  HusimiGrid grid;
  RVec x;
  gauss_legendre(n_theta, x, grid.theta_weight);
  grid.theta.resize(n_theta);
  for (int i = 0; i < n_theta; ++i) grid.theta[i] = std::acos(x[i]);
  grid.phi.resize(n_phi);
  for (int jn = 0; jn < n_phi; ++jn) grid.phi[jn] = 2.0 * M_PI * jn / n_phi;

  const double scale = (dim) / (4.0 * M_PI);  // (2S+1)/4pi
  grid.q.resize(n_theta, n_phi);
  Vec v(dim), rv(dim);
  for (int i = 0; i < n_theta; ++i) {
    const Vec base = css(n, grid.theta[i], 0.0);  // real magnitudes
    for (int jn = 0; jn < n_phi; ++jn) {
      const double phi = grid.phi[jn];
      for (Eigen::Index k = 0; k < dim; ++k)
        v[k] = base[k] * std::polar(1.0, phi * static_cast<double>(k));
      rv.noalias() = rho * v;
      grid.q(i, jn) = scale * v.dot(rv).real();
    }
  }
  return grid;
}

double HusimiGrid::sphere_integral() const {
  const double dphi = 2.0 * M_PI / phi.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    total += theta_weight[i] * q.row(i).sum() * dphi;
  return total;
}

int SqueezingTrace::nearest_checkpoint_at_or_before(double t) const {
  int best = -1;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const int idx = checkpoints[c].first;
    if (times[static_cast<std::size_t>(idx)] <= t + 1e-15)
      best = static_cast<int>(c);
  }
  return best;
}

OptimalSqueezing find_optimal_squeezing(
    const SqueezingTrace& trace, const std::function<double(double)>& resimulate,
    double rel_resolution) {
  if (trace.size() < 3)
    fail(ErrorCode::not_bracketed,
         "trace has fewer than 3 samples; cannot bracket a minimum");
  const auto it = std::min_element(trace.xi2.begin(), trace.xi2.end());
  const std::size_t i = static_cast<std::size_t>(it - trace.xi2.begin());
  if (i == 0 || i + 1 == trace.size())
    fail(ErrorCode::not_bracketed,
         "xi^2 minimum sits on the trace boundary (t = " +
             std::to_string(trace.times[i]) + "); extend the horizon");

  OptimalSqueezing best{trace.times[i], trace.xi2[i]};
  if (!resimulate) return best;

  // golden-section refinement on the bracketing interval
  constexpr double kGolden = 0.6180339887498949;
  double a = trace.times[i - 1];
  double b = trace.times[i + 1];
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = resimulate(c);
  double fd = resimulate(d);
  while (b - a > rel_resolution * std::max(best.t_min, 1e-300)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = resimulate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = resimulate(d);
    }
    const double t_mid = 0.5 * (a + b);
    const double f_best = std::min(fc, fd);
    if (f_best < best.xi2_min) best = {fc < fd ? c : d, f_best};
    (void)t_mid;
  }
  return best;
}

}  // namespace ssq
