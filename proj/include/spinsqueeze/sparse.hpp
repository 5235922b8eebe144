#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinsqueeze/types.hpp"

namespace ssq {

enum class Symmetry { hermitian, anti_hermitian, general };

// Minimal abstract operator: what the propagator needs to know.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index dim() const = 0;
  virtual void apply(const Vec& x, Vec& y) const = 0;  // y = A x
  virtual bool hermitian() const = 0;
  // Upper bound on the spectral radius (inf-norm for concrete matrices).
  virtual double norm_bound() const = 0;
  // Non-empty iff the operator is diagonal with real entries; the
  // propagator then applies exact phases instead of Krylov steps.
  virtual const RVec* real_diagonal() const { return nullptr; }

  Vec operator()(const Vec& x) const {
    Vec y(dim());
    apply(x, y);
    return y;
  }
};

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  cplx value;
};

// Row-compressed sparse matrix with column-sorted entries and a declared
// symmetry flag that is verified at construction (1e-12 relative,
// elementwise). Exact zeros are dropped; nothing else is.
// Immutable after construction; matvec is the only hot kernel.
class SparseHermitianOperator final : public LinearOperator {
 public:
  static constexpr double kFlagTol = 1e-12;

  static SparseHermitianOperator from_triplets(Eigen::Index dim,
                                               std::vector<Triplet> entries,
                                               Symmetry sym);
  static SparseHermitianOperator diagonal(const RVec& d);
  static SparseHermitianOperator identity(Eigen::Index dim);
  static SparseHermitianOperator from_dense(const Mat& a, Symmetry sym,
                                            double drop_tol = 0.0);

  // Kronecker product following the S-major index convention
  // (row = r_a * b.dim() + r_b).
  friend SparseHermitianOperator kron(const SparseHermitianOperator& a,
                                      const SparseHermitianOperator& b);

  // sum_i coeff[i] * ops[i]; the declared symmetry of the result is
  // verified, not inferred.
  static SparseHermitianOperator linear_combination(
      std::span<const cplx> coeffs,
      std::span<const SparseHermitianOperator* const> ops, Symmetry sym);

  SparseHermitianOperator scaled(cplx factor, Symmetry sym) const;

  Eigen::Index dim() const override { return dim_; }
  void apply(const Vec& x, Vec& y) const override;
  bool hermitian() const override { return sym_ == Symmetry::hermitian; }
  double norm_bound() const override { return norm_bound_; }
  const RVec* real_diagonal() const override {
    return diagonal_.size() > 0 ? &diagonal_ : nullptr;
  }

  Symmetry symmetry() const { return sym_; }
  std::size_t nnz() const { return val_.size(); }
  bool is_diagonal() const { return diagonal_.size() > 0; }
  Mat to_dense() const;
  std::size_t memory_bytes() const;

  // max_{rc} |A_rc -+ conj(A_cr)| / scale  (0 for flag `general`)
  double symmetry_violation() const;

  // Raw CSR access for fused kernels (moments on reshaped product states).
  std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return col_; }
  std::span<const cplx> values() const { return val_; }

  cplx coeff(Eigen::Index r, Eigen::Index c) const;

  // Row-partitioned threaded matvec. Each output row is still accumulated
  // in a fixed order, so results do not depend on the partition.
  void apply_parallel(const Vec& x, Vec& y, int threads) const;

 private:
  SparseHermitianOperator() = default;
  void finalize(Symmetry sym);

  Eigen::Index dim_ = 0;
  Symmetry sym_ = Symmetry::general;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> col_;
  std::vector<cplx> val_;
  RVec diagonal_;  // populated iff purely diagonal with real entries
  double norm_bound_ = 0.0;
};

SparseHermitianOperator kron(const SparseHermitianOperator& a,
                             const SparseHermitianOperator& b);

}  // namespace ssq
