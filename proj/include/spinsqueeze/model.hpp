#pragma once

#include <cstddef>
#include <memory>

#include "spinsqueeze/propagate.hpp"
#include "spinsqueeze/sparse.hpp"
#include "spinsqueeze/spin_ops.hpp"

namespace ssq {

// Coupling strengths of the two-ensemble interaction
//   H_int = g_x Sx Jx + g_y Sy Jy + g_z Sz Jz   (hbar = 1).
// g_z != 0 is required: the z-z term is the unperturbed part every
// effective Hamiltonian is derived around.
struct CouplingParams {
  double gx = 1.0;
  double gy = 1.0;
  double gz = -2.0;

  // Twisting strength chi = gx gy / (2 gz). Stored logic lives here only,
  // so call sites cannot get the sign wrong for negative gz.
  double chi() const { return gx * gy / (2.0 * gz); }
  void validate() const;
};

// Truncated bosonic mode of the Holstein-Primakoff picture.
struct BosonSpace {
  int n_max = 60;
  double tail_threshold = 1e-8;  // max tolerated population above the margin
  int tail_margin = 10;          // occupations >= n_max - margin count as tail

  void validate() const;
};

constexpr std::size_t kDefaultBudgetBytes = std::size_t{4} << 30;  // 4 GiB

// Exact product-space coupling Hamiltonian (sum of three Kronecker terms).
SparseHermitianOperator build_h_int(const CouplingParams& g,
                                    const SpinSystem& sys,
                                    std::size_t budget_bytes = kDefaultBudgetBytes);

// chi Sz^2 on the S ensemble alone (diagonal).
SparseHermitianOperator build_h_oat(const CouplingParams& g, int n_s);

// gz J Sz + chi Sz^2 on the S ensemble alone (diagonal).
SparseHermitianOperator build_h_eff(const CouplingParams& g,
                                    const SpinSystem& sys);

// (gx gy / 6 gz) (2 Sx^2 + Sz^2) on the S ensemble alone.
SparseHermitianOperator build_h_tat(const CouplingParams& g, int n_s);

// Generator of the decoupling similarity transformation,
//   (1/(4 gz J)) [ (gx-gy)(S-J- - S+J+) + (gx+gy)(S-J+ - S+J-) ],
// anti-hermitian on the product space.
SparseHermitianOperator build_s_fn(const CouplingParams& g,
                                   const SpinSystem& sys);

// Transformed Hamiltonian in the truncated spin (x) boson representation:
//   [gz J + (gx^2+gy^2)/(4gz) + (gx^2-gy^2)/(4gz)(aa + a†a†)
//        + (gx^2+gy^2-2gz^2)/(2gz) a†a] Sz
//   + [gx Sx (a + a†) + i gy Sy (a† - a)]/sqrt(2J)
//   + chi Sz^2.
// Basis: index = i_s * (n_max+1) + n_boson (occupation ascending).
SparseHermitianOperator build_h_fn_hp(const CouplingParams& g, int n_s,
                                      int n_j, const BosonSpace& bspace);

// Population of the truncation tail (occupations >= n_max - tail_margin) of
// a spin (x) boson state; the experiment drivers abort when it exceeds
// bspace.tail_threshold.
double hp_tail_population(const Vec& psi, int n_s, const BosonSpace& bspace);

// v -> e^{sign G} op e^{-sign G} v realized as three exponential-multiply
// applications; never forms the conjugated matrix. The generator must be
// anti-hermitian (so e^{G} is unitary and the conjugation is a similarity
// by a unitary, preserving hermiticity of `op`).
class ConjugatedOperator final : public LinearOperator {
 public:
  ConjugatedOperator(std::shared_ptr<const SparseHermitianOperator> op,
                     std::shared_ptr<const SparseHermitianOperator> generator,
                     int sign, PropagatorConfig cfg = {});

  Eigen::Index dim() const override { return op_->dim(); }
  void apply(const Vec& x, Vec& y) const override;
  bool hermitian() const override { return op_->hermitian(); }
  double norm_bound() const override { return op_->norm_bound(); }

 private:
  std::shared_ptr<const SparseHermitianOperator> op_;
  std::shared_ptr<const SparseHermitianOperator> generator_;
  // Hermitian operator K with G = -iK, reused by both exponentials.
  SparseHermitianOperator herm_generator_;
  int sign_;
  PropagatorConfig cfg_;
};

}  // namespace ssq
