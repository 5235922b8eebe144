#include "spinsqueeze/spin_ops.hpp"

#include <cmath>

namespace ssq {

namespace {

void require_particle_count(int n) {
  if (n < 1)
    fail(ErrorCode::invalid_argument,
         "particle count must be a positive integer, got " + std::to_string(n));
}

}  // namespace

SpinSystem::SpinSystem(int n_s_particles, int n_j_particles)
    : n_s(n_s_particles), n_j(n_j_particles) {
  require_particle_count(n_s);
  require_particle_count(n_j);
}

RVec magnetic_numbers(int n) {
  require_particle_count(n);
  const double j = 0.5 * n;
  RVec m(n + 1);
  for (int i = 0; i <= n; ++i) m[i] = j - i;
  return m;
}

SparseHermitianOperator spin_plus(int n) {
  require_particle_count(n);
  const double j = 0.5 * n;
  std::vector<Triplet> t;
  for (int i = 1; i <= n; ++i) {
    const double m = j - i;  // source level; target is i-1 with m+1
    t.push_back({i - 1, i, cplx{std::sqrt(j * (j + 1) - m * (m + 1)), 0.0}});
  }
  return SparseHermitianOperator::from_triplets(n + 1, std::move(t),
                                                Symmetry::general);
}

SparseHermitianOperator spin_minus(int n) {
  require_particle_count(n);
  const double j = 0.5 * n;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    const double m = j - i;  // S- |j,m> = sqrt(j(j+1) - m(m-1)) |j,m-1>
    t.push_back({i + 1, i, cplx{std::sqrt(j * (j + 1) - m * (m - 1)), 0.0}});
  }
  return SparseHermitianOperator::from_triplets(n + 1, std::move(t),
                                                Symmetry::general);
}

SpinMatrices spin_matrices(int n) {
  require_particle_count(n);
  const auto sp = spin_plus(n);
  const auto sm = spin_minus(n);
  const SparseHermitianOperator* ops[] = {&sp, &sm};
  const cplx cx[] = {0.5, 0.5};
  const cplx cy[] = {cplx{0.0, -0.5}, cplx{0.0, 0.5}};
  return SpinMatrices{
      SparseHermitianOperator::linear_combination(cx, ops, Symmetry::hermitian),
      SparseHermitianOperator::linear_combination(cy, ops, Symmetry::hermitian),
      SparseHermitianOperator::diagonal(magnetic_numbers(n))};
}

StateVector css(int n, double theta, double phi) {
  require_particle_count(n);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Vec v = Vec::Zero(n + 1);
  if (s == 0.0) {
    v[0] = 1.0;
  } else if (c == 0.0) {
    v[n] = 1.0;
  } else {
    // log-domain binomial amplitudes, exponentiated at the end
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(s));
    const double lg = std::lgamma(n + 1.0);
    for (int i = 0; i <= n; ++i) {
      const double logmag = 0.5 * (lg - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0));
      double mag = std::exp(logmag + (n - i) * lc + i * ls);
      if (c < 0 && (n - i) % 2) mag = -mag;
      if (s < 0 && i % 2) mag = -mag;
      v[i] = std::polar(1.0, phi * i) * mag;
    }
  }
  v /= v.norm();
  return v;
}

Mat rotation_dense(int n, Axis axis, double angle) {
  require_particle_count(n);
  if (axis == Axis::z) {
    const RVec m = magnetic_numbers(n);
    Mat u = Mat::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) u(i, i) = std::polar(1.0, -angle * m[i]);
    return u;
  }
  const auto mats = spin_matrices(n);
  const Mat gen = (axis == Axis::x ? mats.sx : mats.sy).to_dense();
  Eigen::SelfAdjointEigenSolver<Mat> es(gen);
  Vec phases(n + 1);
  for (int i = 0; i <= n; ++i)
    phases[i] = std::polar(1.0, -angle * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

SparseHermitianOperator rotation(int n, Axis axis, double angle) {
  if (axis == Axis::z) {
    const RVec m = magnetic_numbers(n);
    std::vector<Triplet> t;
    for (int i = 0; i <= n; ++i)
      t.push_back({i, i, std::polar(1.0, -angle * m[i])});
    return SparseHermitianOperator::from_triplets(n + 1, std::move(t),
                                                  Symmetry::general);
  }
  return SparseHermitianOperator::from_dense(rotation_dense(n, axis, angle),
                                             Symmetry::general);
}

SparseHermitianOperator embed(const SparseHermitianOperator& op,
                              const SpinSystem& sys, Side side) {
  const Eigen::Index want = side == Side::s_side ? sys.dim_s() : sys.dim_j();
  if (op.dim() != want)
    fail(ErrorCode::invalid_argument,
         "embed: operator dimension " + std::to_string(op.dim()) +
             " does not match factor dimension " + std::to_string(want));
  std::vector<Triplet> t;
  t.reserve(op.nnz() * static_cast<std::size_t>(
                           side == Side::s_side ? sys.dim_j() : sys.dim_s()));
  if (side == Side::s_side) {
    const Eigen::Index dj = sys.dim_j();
    for (Eigen::Index r = 0; r < op.dim(); ++r)
      for (auto k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k)
        for (Eigen::Index ij = 0; ij < dj; ++ij)
          t.push_back({r * dj + ij,
                       static_cast<std::int64_t>(op.cols()[static_cast<std::size_t>(k)]) * dj + ij,
                       op.values()[static_cast<std::size_t>(k)]});
  } else {
    const Eigen::Index dj = sys.dim_j();
    for (Eigen::Index is = 0; is < sys.dim_s(); ++is)
      for (Eigen::Index r = 0; r < op.dim(); ++r)
        for (auto k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k)
          t.push_back({is * dj + r,
                       is * dj + op.cols()[static_cast<std::size_t>(k)],
                       op.values()[static_cast<std::size_t>(k)]});
  }
  return SparseHermitianOperator::from_triplets(sys.total_dim(), std::move(t),
                                                op.symmetry());
}

StateVector product_css(const SpinSystem& sys, double theta_s, double phi_s,
                        double theta_j, double phi_j) {
  const Vec a = css(sys.n_s, theta_s, phi_s);
  const Vec b = css(sys.n_j, theta_j, phi_j);
  Vec out(sys.total_dim());
  for (int is = 0; is < sys.dim_s(); ++is)
    out.segment(static_cast<Eigen::Index>(is) * sys.dim_j(), sys.dim_j()) =
        a[is] * b;
  return out;
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Axis axis_from_name(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  fail(ErrorCode::invalid_argument, "unknown axis '" + name + "'");
}

}  // namespace ssq
