#include <cmath>
#include <random>
#include <sstream>

#include "spinsqueeze/experiments.hpp"

namespace ssq {

namespace {

struct Runner {
  VerifyReport report;

  void check(const std::string& name, double value, double bound) {
    std::ostringstream detail;
    detail << value << " (bound " << bound << ")";
    const bool pass = value <= bound;
    report.checks.push_back({name, pass, detail.str()});
    if (!pass) report.all_pass = false;
  }

  void check_bool(const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, detail});
    if (!pass) report.all_pass = false;
  }
};

double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

Mat random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Mat a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = cplx{unit(rng), unit(rng)};
  return 0.5 * (a + a.adjoint());
}

Vec random_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx{unit(rng), unit(rng)};
  v /= v.norm();
  return v;
}

}  // namespace

VerifyReport run_verify() {
  Runner r;
  std::mt19937_64 rng(0x5eed5eedULL);

  // angular momentum algebra
  {
    double worst_comm = 0.0, worst_casimir = 0.0;
    for (const int n : {1, 2, 5, 17, 40}) {
      const auto s = spin_matrices(n);
      const Mat sx = s.sx.to_dense(), sy = s.sy.to_dense(), sz = s.sz.to_dense();
      const cplx i1{0.0, 1.0};
      worst_comm = std::max({worst_comm, max_abs(sx * sy - sy * sx - i1 * sz),
                             max_abs(sy * sz - sz * sy - i1 * sx),
                             max_abs(sz * sx - sx * sz - i1 * sy)});
      const double j = 0.5 * n;
      worst_casimir = std::max(
          worst_casimir, max_abs(sx * sx + sy * sy + sz * sz -
                                 j * (j + 1) * Mat::Identity(n + 1, n + 1)));
    }
    r.check("commutators", worst_comm, 1e-12);
    r.check("casimir", worst_casimir, 1e-10);
  }

  // coherent states
  {
    double worst_norm = 0.0, worst_dir = 0.0;
    for (const int n : {1, 4, 23, 100, 200}) {
      const Vec v = css(n, 1.1, -0.7);
      worst_norm = std::max(worst_norm, std::abs(v.norm() - 1.0));
      const auto m = collective_moments(v, n);
      const Eigen::Vector3d want =
          0.5 * n *
          Eigen::Vector3d(std::sin(1.1) * std::cos(-0.7),
                          std::sin(1.1) * std::sin(-0.7), std::cos(1.1));
      worst_dir = std::max(worst_dir, (m.mean - want).norm() / (0.5 * n));
    }
    r.check("css_norm", worst_norm, 1e-12);
    r.check("css_direction", worst_dir, 1e-10);
    const Vec v = css(4, M_PI / 2, 0.0);
    RVec want(5);
    want << 1, 2, std::sqrt(6.0), 2, 1;
    want /= want.norm();
    r.check("css_binomial_amplitudes", (v.real() - want).cwiseAbs().maxCoeff(),
            1e-12);
  }

  // rotations
  {
    double worst_unitary = 0.0, worst_group = 0.0;
    for (const Axis axis : {Axis::x, Axis::y, Axis::z}) {
      const Mat r1 = rotation_dense(9, axis, 0.71);
      const Mat r2 = rotation_dense(9, axis, -1.3);
      const Mat r12 = rotation_dense(9, axis, 0.71 - 1.3);
      worst_unitary = std::max(
          worst_unitary, max_abs(r1.adjoint() * r1 - Mat::Identity(10, 10)));
      worst_group = std::max(worst_group, max_abs(r1 * r2 - r12));
    }
    r.check("rotation_unitarity", worst_unitary, 1e-12);
    r.check("rotation_group_law", worst_group, 1e-12);
  }

  // builder flags
  {
    const SpinSystem sys(4, 6);
    const CouplingParams g{0.8, 1.3, -2.0};
    double worst = std::max({build_h_int(g, sys).symmetry_violation(),
                             build_h_oat(g, sys.n_s).symmetry_violation(),
                             build_h_eff(g, sys).symmetry_violation(),
                             build_h_tat(g, sys.n_s).symmetry_violation(),
                             build_s_fn(g, sys).symmetry_violation(),
                             build_h_fn_hp(g, 4, 100, BosonSpace{12})
                                 .symmetry_violation()});
    r.check("builder_flags", worst, 1e-12);

    // isotropic coupling conserves Sz + Jz
    const CouplingParams giso{1.0, 1.0, -2.0};
    const auto h = build_h_int(giso, sys);
    const auto s = spin_matrices(sys.n_s);
    const auto j = spin_matrices(sys.n_j);
    const Mat hz = embed(s.sz, sys, Side::s_side).to_dense() +
                   embed(j.sz, sys, Side::j_side).to_dense();
    const Mat hd = h.to_dense();
    double worst_comm = 0.0;
    for (int c = 0; c < 3; ++c) {
      const Vec v = random_state(sys.total_dim(), rng);
      worst_comm = std::max(worst_comm, ((hd * (hz * v) - hz * (hd * v)).norm()));
    }
    r.check("charge_conservation_isotropic", worst_comm, 1e-10);
  }

  // propagator vs dense oracle
  {
    double worst = 0.0, worst_rev = 0.0;
    for (const int dim : {24, 96, 200}) {
      const Mat h = random_hermitian(dim, rng);
      const auto hs = SparseHermitianOperator::from_dense(h, Symmetry::hermitian);
      const Vec psi = random_state(dim, rng);
      const double t = 0.9;
      const Vec a = evolve(hs, psi, t);
      const Vec b = evolve_dense(hs, psi, t);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      const Vec back = evolve(hs, a, -t);
      worst_rev = std::max(worst_rev, (back - psi).cwiseAbs().maxCoeff());
    }
    r.check("krylov_vs_dense", worst, 1e-8);
    r.check("time_reversal", worst_rev, 1e-9);
  }

  // pulse identities
  {
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_int_distribution<int> half(1, 10);
    double worst10 = 0.0;
    for (int it = 0; it < 5; ++it) {
      const int n = 2 * half(rng);
      const auto s = spin_matrices(n);
      const Mat sz = s.sz.to_dense();
      const Mat sz2 = sz * sz;
      const double a = coef(rng), b = coef(rng);
      const Mat u = expm(cplx{0, -1} * (a * sz + b * sz2));
      const Mat rp = rotation_dense(n, Axis::y, M_PI);
      const Mat lhs = (u * rp) * (u * rp);
      const Mat rhs = expm(cplx{0, -2} * b * sz2);
      worst10 = std::max(worst10, max_abs(lhs - rhs));
    }
    r.check("echo_identity", worst10, 1e-10);

    const int n = 12;
    const auto s = spin_matrices(n);
    const Mat sx = s.sx.to_dense(), sz = s.sz.to_dense();
    const Mat sz2 = sz * sz, sx2 = sx * sx;
    const Mat rp = rotation_dense(n, Axis::y, M_PI / 2);
    const Mat rm = rotation_dense(n, Axis::y, -M_PI / 2);
    std::vector<double> taus, residuals;
    for (const double tau : {1e-4 / n, 1e-3 / n, 1e-2 / n}) {
      const Mat lhs = expm(cplx{0, -tau} * sz2) * rm *
                      expm(cplx{0, -2 * tau} * sz2) * rp;
      const Mat rhs = expm(cplx{0, -tau} * (2 * sx2 + sz2));
      taus.push_back(tau);
      residuals.push_back(max_abs(lhs - rhs));
    }
    const FitResult fit = fit_power_law(taus, residuals);
    r.check("tat_identity_order", std::abs(fit.exponent - 2.0), 0.2);
  }

  // squeezing parameter sanity
  {
    double worst = 0.0;
    for (const int n : {2, 9, 64, 200})
      worst = std::max(worst, std::abs(squeezing_parameter(css(n, M_PI / 2, 0.3), n) - 1.0));
    r.check("css_xi2_is_one", worst, 1e-10);

    // frame covariance: a rigid rotation leaves xi^2 unchanged
    const int n = 16;
    const CouplingParams g{1, 1, -2};
    const auto h = build_h_oat(g, n);
    const Vec squeezed = evolve(h, css(n, M_PI / 2, 0.0), 0.1);
    const double xi = squeezing_parameter(squeezed, n);
    double worst_rot = 0.0;
    for (const Axis axis : {Axis::x, Axis::y, Axis::z}) {
      Vec v(squeezed.size());
      rotation(n, axis, 0.83).apply(squeezed, v);
      worst_rot = std::max(worst_rot, std::abs(squeezing_parameter(v, n) - xi));
    }
    r.check("xi2_rotation_invariance", worst_rot, 1e-10);
  }

  // Husimi normalization
  {
    const int n = 20;
    const Vec v = css(n, 0.9, 0.4);
    const Mat rho = v * v.adjoint();
    const auto grid = husimi_q(rho);
    r.check("husimi_normalization", std::abs(grid.sphere_integral() - 1.0), 1e-3);
    r.check_bool("husimi_nonnegative", grid.q.minCoeff() >= -1e-14,
                 std::to_string(grid.q.minCoeff()));
  }

  // power-law fit recovery
  {
    std::vector<double> x{3, 7, 11, 40, 90}, y;
    for (const double v : x) y.push_back(2.5 * std::pow(v, -0.662));
    const FitResult fit = fit_power_law(x, y);
    r.check("fit_exact_recovery", std::abs(fit.exponent + 0.662), 1e-10);
  }

  // conjugation against dense similarity
  {
    const SpinSystem sys(2, 8);
    const CouplingParams g{0.9, 0.5, -2.0};
    const auto h =
        std::make_shared<SparseHermitianOperator>(build_h_int(g, sys));
    const auto gen = std::make_shared<SparseHermitianOperator>(build_s_fn(g, sys));
    const ConjugatedOperator conj_op(h, gen, +1);
    const Mat gd = gen->to_dense();
    const Mat dense = expm(gd) * h->to_dense() * expm(-gd);
    const Vec v = random_state(sys.total_dim(), rng);
    Vec got(v.size());
    conj_op.apply(v, got);
    r.check("conjugation_vs_dense", (got - dense * v).cwiseAbs().maxCoeff(), 1e-8);
  }

  return r.report;
}

}  // namespace ssq
