#pragma once

#include "spinsqueeze/sparse.hpp"
#include "spinsqueeze/types.hpp"

namespace ssq {

// Two collective spins S = n_s/2 and J = n_j/2, maximal symmetric sectors
// only. Basis ordering is the single source of truth for every module:
//   product index = i_s * dim_j + i_j,
// with i descending in the magnetic quantum number (i = 0 <-> m = +j),
// so the partial trace over J is a contiguous (dim_s x dim_j) reshape.
struct SpinSystem {
  SpinSystem(int n_s_particles, int n_j_particles);

  int n_s;
  int n_j;

  int dim_s() const { return n_s + 1; }
  int dim_j() const { return n_j + 1; }
  Eigen::Index total_dim() const {
    return static_cast<Eigen::Index>(dim_s()) * dim_j();
  }
  double spin_s() const { return 0.5 * n_s; }
  double spin_j() const { return 0.5 * n_j; }
};

enum class Axis { x, y, z };
enum class Side { s_side, j_side };

struct SpinMatrices {
  SparseHermitianOperator sx, sy, sz;
};

// Collective spin components in the (n+1)-dimensional spin-(n/2)
// representation: Sz = diag(j, j-1, ..., -j), Sx = (S+ + S-)/2,
// Sy = (S+ - S-)/(2i).
SpinMatrices spin_matrices(int n);

// Ladder operators <j,m+1|S+|j,m> = sqrt(j(j+1) - m(m+1)); flag `general`.
SparseHermitianOperator spin_plus(int n);
SparseHermitianOperator spin_minus(int n);

// m-values in basis order (descending).
RVec magnetic_numbers(int n);

// Coherent spin state along (theta, phi). Amplitudes are assembled in log
// space so n of a few hundred does not overflow the binomials.
StateVector css(int n, double theta, double phi);

// exp(-i angle S_axis); diagonal phases for z, dense exponentiation of the
// small generator otherwise. Unitary, flagged `general`.
SparseHermitianOperator rotation(int n, Axis axis, double angle);
Mat rotation_dense(int n, Axis axis, double angle);

// Kronecker embedding A (x) I or I (x) A per the basis convention.
SparseHermitianOperator embed(const SparseHermitianOperator& op,
                              const SpinSystem& sys, Side side);

// |css(n_s)> (x) |css(n_j)>.
StateVector product_css(const SpinSystem& sys, double theta_s, double phi_s,
                        double theta_j, double phi_j);

const char* axis_name(Axis a);
Axis axis_from_name(const std::string& name);

}  // namespace ssq
