#include "spinsqueeze/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ssq {

namespace {

const char* symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::hermitian: return "hermitian";
    case Symmetry::anti_hermitian: return "anti-hermitian";
    case Symmetry::general: return "general";
  }
  return "?";
}

}  // namespace

SparseHermitianOperator SparseHermitianOperator::from_triplets(
    Eigen::Index dim, std::vector<Triplet> entries, Symmetry sym) {
  if (dim <= 0) fail(ErrorCode::invalid_argument, "operator dimension must be positive");
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= dim || e.col < 0 || e.col >= dim)
      fail(ErrorCode::invalid_argument, "triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseHermitianOperator op;
  op.dim_ = dim;
  op.row_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);
  op.col_.reserve(entries.size());
  op.val_.reserve(entries.size());

  std::size_t i = 0;
  for (Eigen::Index r = 0; r < dim; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      cplx v = entries[i].value;
      std::int64_t c = entries[i].col;
      ++i;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
        v += entries[i].value;  // accumulate duplicates
        ++i;
      }
      if (v != cplx{0.0, 0.0}) {  // exact zeros dropped, nothing else
        op.col_.push_back(static_cast<std::int32_t>(c));
        op.val_.push_back(v);
      }
    }
    op.row_ptr_[static_cast<std::size_t>(r) + 1] =
        static_cast<std::int64_t>(op.col_.size());
  }
  op.finalize(sym);
  return op;
}

void SparseHermitianOperator::finalize(Symmetry sym) {
  sym_ = sym;
  norm_bound_ = 0.0;
  bool diag = true;
  for (Eigen::Index r = 0; r < dim_; ++r) {
    double row_sum = 0.0;
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      row_sum += std::abs(val_[static_cast<std::size_t>(k)]);
      if (col_[static_cast<std::size_t>(k)] != r) diag = false;
    }
    norm_bound_ = std::max(norm_bound_, row_sum);
  }

  if (sym != Symmetry::general) {
    double viol = symmetry_violation();
    if (viol > kFlagTol)
      fail(ErrorCode::invalid_argument,
           std::string("operator violates declared ") + symmetry_name(sym) +
               " flag (relative violation " + std::to_string(viol) + ")");
  }

  diagonal_.resize(0);
  if (diag && sym_ == Symmetry::hermitian) {
    diagonal_ = RVec::Zero(dim_);
    for (Eigen::Index r = 0; r < dim_; ++r)
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        diagonal_[r] = val_[static_cast<std::size_t>(k)].real();
  }
}

double SparseHermitianOperator::symmetry_violation() const {
  if (sym_ == Symmetry::general) return 0.0;
  const double sign = sym_ == Symmetry::hermitian ? 1.0 : -1.0;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < dim_; ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto c = col_[static_cast<std::size_t>(k)];
      const cplx v = val_[static_cast<std::size_t>(k)];
      const cplx w = coeff(c, r);
      const double scale = std::max({std::abs(v), std::abs(w), 1e-300});
      worst = std::max(worst, std::abs(v - sign * std::conj(w)) / scale);
    }
  }
  return worst;
}

cplx SparseHermitianOperator::coeff(Eigen::Index r, Eigen::Index c) const {
  const auto* base = col_.data();
  const auto lo = base + row_ptr_[r];
  const auto hi = base + row_ptr_[r + 1];
  const auto it = std::lower_bound(lo, hi, static_cast<std::int32_t>(c));
  if (it == hi || *it != c) return {0.0, 0.0};
  return val_[static_cast<std::size_t>(row_ptr_[r] + (it - lo))];
}

SparseHermitianOperator SparseHermitianOperator::diagonal(const RVec& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i)
    t.push_back({i, i, cplx{d[i], 0.0}});
  return from_triplets(d.size(), std::move(t), Symmetry::hermitian);
}

SparseHermitianOperator SparseHermitianOperator::identity(Eigen::Index dim) {
  return diagonal(RVec::Ones(dim));
}

SparseHermitianOperator SparseHermitianOperator::from_dense(const Mat& a,
                                                            Symmetry sym,
                                                            double drop_tol) {
  if (a.rows() != a.cols())
    fail(ErrorCode::invalid_argument, "from_dense requires a square matrix");
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (std::abs(a(r, c)) > drop_tol) t.push_back({r, c, a(r, c)});
  return from_triplets(a.rows(), std::move(t), sym);
}

void SparseHermitianOperator::apply(const Vec& x, Vec& y) const {
  if (x.size() != dim_)
    fail(ErrorCode::invalid_argument, "matvec dimension mismatch");
  y.resize(dim_);
  const cplx* xv = x.data();
  cplx* yv = y.data();
  for (Eigen::Index r = 0; r < dim_; ++r) {
    cplx acc{0.0, 0.0};
    const auto end = row_ptr_[r + 1];
    for (auto k = row_ptr_[r]; k < end; ++k)
      acc += val_[static_cast<std::size_t>(k)] * xv[col_[static_cast<std::size_t>(k)]];
    yv[r] = acc;
  }
}

void SparseHermitianOperator::apply_parallel(const Vec& x, Vec& y,
                                             int threads) const {
  if (x.size() != dim_)
    fail(ErrorCode::invalid_argument, "matvec dimension mismatch");
  y.resize(dim_);
  threads = std::max(1, threads);
  if (threads == 1 || dim_ < 4096) {
    apply(x, y);
    return;
  }
  const cplx* xv = x.data();
  cplx* yv = y.data();
  auto worker = [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index r = lo; r < hi; ++r) {
      cplx acc{0.0, 0.0};
      const auto end = row_ptr_[r + 1];
      for (auto k = row_ptr_[r]; k < end; ++k)
        acc += val_[static_cast<std::size_t>(k)] * xv[col_[static_cast<std::size_t>(k)]];
      yv[r] = acc;
    }
  };
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (dim_ + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Eigen::Index lo = t * chunk;
    const Eigen::Index hi = std::min<Eigen::Index>(dim_, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(worker, lo, hi);
  }
  for (auto& th : pool) th.join();
}

Mat SparseHermitianOperator::to_dense() const {
  Mat a = Mat::Zero(dim_, dim_);
  for (Eigen::Index r = 0; r < dim_; ++r)
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      a(r, col_[static_cast<std::size_t>(k)]) = val_[static_cast<std::size_t>(k)];
  return a;
}

std::size_t SparseHermitianOperator::memory_bytes() const {
  return row_ptr_.size() * sizeof(std::int64_t) +
         col_.size() * sizeof(std::int32_t) + val_.size() * sizeof(cplx);
}

SparseHermitianOperator kron(const SparseHermitianOperator& a,
                             const SparseHermitianOperator& b) {
  std::vector<Triplet> t;
  t.reserve(a.nnz() * b.nnz());
  for (Eigen::Index ra = 0; ra < a.dim(); ++ra) {
    for (auto ka = a.row_ptr()[ra]; ka < a.row_ptr()[ra + 1]; ++ka) {
      const auto ca = a.cols()[static_cast<std::size_t>(ka)];
      const cplx va = a.values()[static_cast<std::size_t>(ka)];
      for (Eigen::Index rb = 0; rb < b.dim(); ++rb) {
        for (auto kb = b.row_ptr()[rb]; kb < b.row_ptr()[rb + 1]; ++kb) {
          const auto cb = b.cols()[static_cast<std::size_t>(kb)];
          const cplx vb = b.values()[static_cast<std::size_t>(kb)];
          t.push_back({ra * b.dim() + rb, static_cast<std::int64_t>(ca) * b.dim() + cb,
                       va * vb});
        }
      }
    }
  }
  // hermitian (x) hermitian and anti (x) anti are hermitian; mixed flags are
  // anti-hermitian; anything involving `general` is general.
  Symmetry sym = Symmetry::general;
  const auto sa = a.symmetry(), sb = b.symmetry();
  if (sa != Symmetry::general && sb != Symmetry::general)
    sym = (sa == sb) ? Symmetry::hermitian : Symmetry::anti_hermitian;
  return SparseHermitianOperator::from_triplets(a.dim() * b.dim(), std::move(t), sym);
}

SparseHermitianOperator SparseHermitianOperator::linear_combination(
    std::span<const cplx> coeffs,
    std::span<const SparseHermitianOperator* const> ops, Symmetry sym) {
  if (coeffs.size() != ops.size() || ops.empty())
    fail(ErrorCode::invalid_argument, "linear_combination: size mismatch");
  const Eigen::Index dim = ops[0]->dim();
  std::vector<Triplet> t;
  std::size_t total = 0;
  for (const auto* op : ops) total += op->nnz();
  t.reserve(total);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = *ops[i];
    if (op.dim() != dim)
      fail(ErrorCode::invalid_argument, "linear_combination: dimension mismatch");
    for (Eigen::Index r = 0; r < dim; ++r)
      for (auto k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k)
        t.push_back({r, op.cols()[static_cast<std::size_t>(k)],
                     coeffs[i] * op.values()[static_cast<std::size_t>(k)]});
  }
  return from_triplets(dim, std::move(t), sym);
}

SparseHermitianOperator SparseHermitianOperator::scaled(cplx factor,
                                                        Symmetry sym) const {
  SparseHermitianOperator out = *this;
  for (auto& v : out.val_) v *= factor;
  out.finalize(sym);
  return out;
}

}  // namespace ssq
