#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spinsqueeze/model.hpp"
#include "spinsqueeze/observables.hpp"
#include "spinsqueeze/propagate.hpp"
#include "test_helpers.hpp"

using namespace ssq;
using namespace ssq::testing;

TEST_CASE("css_moments_are_isotropic") {
  const int n = 14;
  const auto m = collective_moments(css(n, M_PI / 2, 0.0), n);
  CHECK(m.mean[0] == doctest::Approx(0.5 * n).epsilon(1e-12));
  CHECK(std::abs(m.mean[1]) < 1e-12);
  CHECK(std::abs(m.mean[2]) < 1e-12);
  const auto [lo, hi] = m.perpendicular_variances();
  CHECK(lo == doctest::Approx(0.25 * n).epsilon(1e-10));
  CHECK(hi == doctest::Approx(0.25 * n).epsilon(1e-10));
  // trace of the second moments is the Casimir
  const double j = 0.5 * n;
  CHECK(m.second.trace() == doctest::Approx(j * (j + 1)).epsilon(1e-10));
  CHECK(m.mean.norm() <= 0.5 * n + 1e-10);
}

TEST_CASE("sz_eigenstate_points_along_z") {
  const int n = 9;
  Vec psi = Vec::Zero(n + 1);
  psi[0] = 1.0;
  const auto m = collective_moments(psi, n);
  CHECK((m.mean - Eigen::Vector3d(0, 0, 0.5 * n)).norm() < 1e-12);
}

TEST_CASE("short_time_twisting_grows_var_sy") {
  const int n = 16;
  const CouplingParams g{1.0, 1.0, -2.0};
  const auto h = build_h_oat(g, n);
  const Vec psi0 = css(n, M_PI / 2, 0.0);
  const Vec psi = evolve(h, psi0, 0.05);
  const auto m0 = collective_moments(psi0, n);
  const auto m = collective_moments(psi, n);
  CHECK(m.second(1, 1) > m0.second(1, 1));            // Var(S_y) grows
  CHECK(m.mean[0] > 0.95 * 0.5 * n);                  // <S_x> still ~ n/2
}

TEST_CASE("squeezing_parameter_of_css_is_one") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(0.1, M_PI - 0.1), ph(-M_PI, M_PI);
  for (const int n : {1, 5, 40, 200})
    CHECK(std::abs(squeezing_parameter(css(n, th(rng), ph(rng)), n) - 1.0) < 1e-10);
}

TEST_CASE("squeezing_parameter_rotation_invariance") {
  const int n = 12;
  const auto h = build_h_oat(CouplingParams{1, 1, -2}, n);
  const Vec squeezed = evolve(h, css(n, M_PI / 2, 0.0), 0.3);
  const double xi = squeezing_parameter(squeezed, n);
  CHECK(xi < 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (const Axis axis : {Axis::x, Axis::y, Axis::z}) {
    Vec rotated(n + 1);
    rotation(n, axis, angle(rng)).apply(squeezed, rotated);
    CHECK(std::abs(squeezing_parameter(rotated, n) - xi) < 1e-10);
  }
}

TEST_CASE("degenerate_mean_direction_is_an_error") {
  const int n = 4;
  Vec psi = Vec::Zero(n + 1);
  psi[0] = psi[n] = 1.0 / std::sqrt(2.0);  // <S> = 0
  CHECK_THROWS_AS(squeezing_parameter(psi, n), Error);
}

TEST_CASE("reduced_density_product_and_singlet") {
  const SpinSystem sys(1, 1);
  const Mat rho_prod = reduced_density_s(product_css(sys, 1.0, 0.3, 2.0, -1.0), sys);
  CHECK(std::abs(rho_prod.trace().real() - 1.0) < 1e-12);
  CHECK(std::abs((rho_prod * rho_prod).trace().real() - 1.0) < 1e-12);  // pure

  Vec singlet = Vec::Zero(4);
  singlet[1] = 1.0 / std::sqrt(2.0);   // |up,down>
  singlet[2] = -1.0 / std::sqrt(2.0);  // |down,up>
  const Mat rho = reduced_density_s(singlet, sys);
  CHECK(max_abs(Mat(rho - 0.5 * Mat::Identity(2, 2))) < 1e-12);
}

TEST_CASE("reduced_density_on_random_states") {
  std::mt19937_64 rng(3);
  const SpinSystem sys(4, 7);
  for (int it = 0; it < 5; ++it) {
    const Mat rho = reduced_density_s(random_state(sys.total_dim(), rng), sys);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    CHECK(max_abs(Mat(rho - rho.adjoint())) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-12);
  }
}

TEST_CASE("husimi_peak_normalization_and_ellipse") {
  const int n = 24;
  const Vec top = css(n, 0.0, 0.0);
  const auto grid = husimi_q(Mat(top * top.adjoint()));
  CHECK(std::abs(grid.sphere_integral() - 1.0) < 1e-3);
  CHECK(grid.q.minCoeff() > -1e-14);
  // maximum sits at the pole with value (2S+1)/4pi
  Eigen::Index imax, jmax;
  grid.q.maxCoeff(&imax, &jmax);
  CHECK(grid.theta[imax] < grid.theta.minCoeff() + 0.15);
  CHECK(grid.q(imax, jmax) <= (n + 1) / (4.0 * M_PI) + 1e-9);
  CHECK(grid.q(imax, jmax) > 0.8 * (n + 1) / (4.0 * M_PI));

  // squeezed state: anisotropic uncertainty patch
  const auto h = build_h_oat(CouplingParams{1, 1, -2}, n);
  const Vec sq = evolve(h, css(n, M_PI / 2, 0.0), 0.25);
  const auto m = collective_moments(sq, n);
  const auto [lo, hi] = m.perpendicular_variances();
  CHECK(std::sqrt(hi / lo) > 1.0);
  const auto grid_sq = husimi_q(Mat(sq * sq.adjoint()));
  CHECK(std::abs(grid_sq.sphere_integral() - 1.0) < 1e-3);
}

TEST_CASE("gauss_legendre_exactness") {
  RVec x, w;
  gauss_legendre(16, x, w);
  CHECK(std::abs(w.sum() - 2.0) < 1e-13);
  double quad = 0.0;
  for (int i = 0; i < 16; ++i) quad += w[i] * x[i] * x[i];
  CHECK(quad == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("find_optimal_on_a_parabola") {
  SqueezingTrace trace;
  auto f = [](double t) { return 0.2 + 3.0 * (t - 0.37) * (t - 0.37); };
  for (int k = 0; k <= 40; ++k) {
    const double t = k * 0.025;
    trace.times.push_back(t);
    trace.xi2.push_back(f(t));
  }
  const auto opt = find_optimal_squeezing(trace, f, 1e-4);
  CHECK(opt.t_min == doctest::Approx(0.37).epsilon(2e-4));
  CHECK(opt.xi2_min == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("monotone_trace_is_not_bracketed") {
  SqueezingTrace trace;
  for (int k = 0; k <= 10; ++k) {
    trace.times.push_back(0.1 * k);
    trace.xi2.push_back(1.0 - 0.05 * k);
  }
  try {
    find_optimal_squeezing(trace);
    FAIL("expected not_bracketed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_bracketed);
  }
}
