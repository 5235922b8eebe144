#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinsqueeze/spin_ops.hpp"
#include "spinsqueeze/types.hpp"

namespace ssq {

struct CollectiveMoments {
  Eigen::Vector3d mean;             // <S_x>, <S_y>, <S_z>
  Eigen::Matrix3d second;           // <(S_a S_b + S_b S_a)/2>

  // Eigenvalues of the 2x2 covariance restricted to the plane orthogonal
  // to the mean spin direction.
  std::pair<double, double> perpendicular_variances() const;
};

// Moments of the S ensemble. `dim_j` = 1 for a bare (n_s+1)-dimensional
// state; otherwise psi lives on the S-major product space and the S
// operators act on the reshaped (dim_s x dim_j) matrix.
CollectiveMoments collective_moments(const Vec& psi, int n_s,
                                     Eigen::Index dim_j = 1);

// xi^2 = 4 (Delta S_perp)^2_min / n_s, from the closed-form smaller
// eigenvalue of the perpendicular 2x2 covariance. Fails (numerical,
// degenerate direction) when |mean| < 1e-9 n_s.
double squeezing_parameter(const CollectiveMoments& m, int n_s);

double squeezing_parameter(const Vec& psi, int n_s, Eigen::Index dim_j = 1);

// rho_S = Tr_J |psi><psi| via the contiguous reshape.
Mat reduced_density_s(const Vec& psi, const SpinSystem& sys);

struct HusimiGrid {
  RVec theta;          // Gauss-Legendre nodes in cos(theta), as angles
  RVec theta_weight;   // matching quadrature weights (sum = 2)
  RVec phi;            // uniform azimuthal nodes
  RMat q;              // q(i, j) = Q(theta_i, phi_j) >= 0
  double sphere_integral() const;  // == 1 up to quadrature tolerance
};

// Q(theta, phi) = ((2S+1)/4pi) <css(theta,phi)| rho |css(theta,phi)>.
HusimiGrid husimi_q(const Mat& rho, int n_theta = 64, int n_phi = 128);

// Sampled xi^2(t) series with enough state checkpoints to re-simulate any
// window cheaply. Stores moments, never intermediate states (beyond the
// checkpoint cadence).
struct SqueezingTrace {
  std::vector<double> times;
  std::vector<double> xi2;
  std::vector<CollectiveMoments> moments;
  std::vector<std::pair<int, Vec>> checkpoints;  // (sample index, state)
  int checkpoint_stride = 32;
  std::string scheme;
  double period = 0.0;  // stroboscopic period; 0 for continuous traces

  std::size_t size() const { return times.size(); }
  int nearest_checkpoint_at_or_before(double t) const;
};

struct OptimalSqueezing {
  double t_min = 0.0;
  double xi2_min = 1.0;
};

// Coarse-scan minimum of the trace, refined by golden-section re-simulation
// on the bracketing interval until the time resolution reaches
// rel_resolution * t_min. Without an evaluator (stroboscopic traces) the
// discrete minimum is returned. A minimum on the trace boundary raises
// `not_bracketed`; the caller extends the horizon.
OptimalSqueezing find_optimal_squeezing(
    const SqueezingTrace& trace,
    const std::function<double(double)>& resimulate = nullptr,
    double rel_resolution = 1e-3);

// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, RVec& nodes, RVec& weights);

}  // namespace ssq
