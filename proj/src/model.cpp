#include "spinsqueeze/model.hpp"

#include <cmath>

namespace ssq {

void CouplingParams::validate() const {
  if (gz == 0.0)
    fail(ErrorCode::invalid_argument,
         "g_z must be nonzero (the z-z coupling is the unperturbed part)");
  if (!std::isfinite(gx) || !std::isfinite(gy) || !std::isfinite(gz))
    fail(ErrorCode::invalid_argument, "coupling strengths must be finite");
}

void BosonSpace::validate() const {
  if (n_max < 1) fail(ErrorCode::invalid_argument, "boson cutoff must be >= 1");
  if (tail_threshold <= 0 || tail_margin < 0 || tail_margin > n_max)
    fail(ErrorCode::invalid_argument, "invalid boson tail monitor settings");
}

SparseHermitianOperator build_h_int(const CouplingParams& g,
                                    const SpinSystem& sys,
                                    std::size_t budget_bytes) {
  g.validate();
  // Off-diagonal entries come from Sx Jx + Sy Jy (4 per row at most), plus
  // the diagonal; ~16 B value + 4 B column + row pointers.
  const std::size_t dim = static_cast<std::size_t>(sys.total_dim());
  const std::size_t est = dim * 5 * (sizeof(cplx) + sizeof(std::int32_t)) +
                          dim * sizeof(std::int64_t);
  if (est > budget_bytes)
    fail(ErrorCode::budget,
         "build_h_int estimate " + std::to_string(est) + " bytes exceeds budget " +
             std::to_string(budget_bytes) + " bytes (n_s=" + std::to_string(sys.n_s) +
             ", n_j=" + std::to_string(sys.n_j) + ")");

  const auto s = spin_matrices(sys.n_s);
  const auto j = spin_matrices(sys.n_j);
  const auto xx = kron(s.sx, j.sx);
  const auto yy = kron(s.sy, j.sy);
  const auto zz = kron(s.sz, j.sz);
  const SparseHermitianOperator* ops[] = {&xx, &yy, &zz};
  const cplx coeffs[] = {g.gx, g.gy, g.gz};
  return SparseHermitianOperator::linear_combination(coeffs, ops,
                                                     Symmetry::hermitian);
}

SparseHermitianOperator build_h_oat(const CouplingParams& g, int n_s) {
  g.validate();
  const RVec m = magnetic_numbers(n_s);
  return SparseHermitianOperator::diagonal(g.chi() * m.cwiseProduct(m));
}

SparseHermitianOperator build_h_eff(const CouplingParams& g,
                                    const SpinSystem& sys) {
  g.validate();
  const RVec m = magnetic_numbers(sys.n_s);
  return SparseHermitianOperator::diagonal(g.gz * sys.spin_j() * m +
                                           g.chi() * m.cwiseProduct(m));
}

SparseHermitianOperator build_h_tat(const CouplingParams& g, int n_s) {
  g.validate();
  const auto s = spin_matrices(n_s);
  const Mat sx = s.sx.to_dense();
  const Mat sz = s.sz.to_dense();
  const double c = g.gx * g.gy / (6.0 * g.gz);
  return SparseHermitianOperator::from_dense(c * (2.0 * sx * sx + sz * sz),
                                             Symmetry::hermitian);
}

SparseHermitianOperator build_s_fn(const CouplingParams& g,
                                   const SpinSystem& sys) {
  g.validate();
  const auto sp = spin_plus(sys.n_s);
  const auto sm = spin_minus(sys.n_s);
  const auto jp = spin_plus(sys.n_j);
  const auto jm = spin_minus(sys.n_j);
  const auto smjm = kron(sm, jm);
  const auto spjp = kron(sp, jp);
  const auto smjp = kron(sm, jp);
  const auto spjm = kron(sp, jm);
  const double pref = 1.0 / (4.0 * g.gz * sys.spin_j());
  const cplx c1 = pref * (g.gx - g.gy);
  const cplx c2 = pref * (g.gx + g.gy);
  const SparseHermitianOperator* ops[] = {&smjm, &spjp, &smjp, &spjm};
  const cplx coeffs[] = {c1, -c1, c2, -c2};
  return SparseHermitianOperator::linear_combination(coeffs, ops,
                                                     Symmetry::anti_hermitian);
}

namespace {

SparseHermitianOperator boson_lowering(int n_max) {
  std::vector<Triplet> t;
  for (int n = 1; n <= n_max; ++n)
    t.push_back({n - 1, n, cplx{std::sqrt(static_cast<double>(n)), 0.0}});
  return SparseHermitianOperator::from_triplets(n_max + 1, std::move(t),
                                                Symmetry::general);
}

}  // namespace

SparseHermitianOperator build_h_fn_hp(const CouplingParams& g, int n_s,
                                      int n_j, const BosonSpace& bspace) {
  g.validate();
  bspace.validate();
  if (n_j < 1) fail(ErrorCode::invalid_argument, "n_j must be >= 1");
  const double bigj = 0.5 * n_j;
  const int db = bspace.n_max + 1;

  const auto s = spin_matrices(n_s);
  const Mat a = boson_lowering(bspace.n_max).to_dense();
  const Mat ad = a.adjoint();
  const Mat ib = Mat::Identity(db, db);

  const Mat bracket =
      (g.gz * bigj + (g.gx * g.gx + g.gy * g.gy) / (4.0 * g.gz)) * ib +
      ((g.gx * g.gx - g.gy * g.gy) / (4.0 * g.gz)) * (a * a + ad * ad) +
      ((g.gx * g.gx + g.gy * g.gy - 2.0 * g.gz * g.gz) / (2.0 * g.gz)) *
          (ad * a);

  const auto sx_apad = kron(s.sx, SparseHermitianOperator::from_dense(
                                      a + ad, Symmetry::hermitian));
  const auto sy_adma = kron(
      s.sy, SparseHermitianOperator::from_dense(
                cplx{0.0, 1.0} * (ad - a), Symmetry::hermitian));
  const auto sz_bracket = kron(s.sz, SparseHermitianOperator::from_dense(
                                         bracket, Symmetry::hermitian));
  const RVec m = magnetic_numbers(n_s);
  const auto sz2 = SparseHermitianOperator::diagonal(m.cwiseProduct(m));
  const auto sz2_ib =
      kron(sz2, SparseHermitianOperator::identity(db));

  const double root = 1.0 / std::sqrt(2.0 * bigj);
  const SparseHermitianOperator* ops[] = {&sz_bracket, &sx_apad, &sy_adma,
                                          &sz2_ib};
  const cplx coeffs[] = {1.0, g.gx * root, g.gy * root, g.chi()};
  return SparseHermitianOperator::linear_combination(coeffs, ops,
                                                     Symmetry::hermitian);
}

double hp_tail_population(const Vec& psi, int n_s, const BosonSpace& bspace) {
  const int db = bspace.n_max + 1;
  if (psi.size() != static_cast<Eigen::Index>(n_s + 1) * db)
    fail(ErrorCode::invalid_argument, "hp_tail_population: dimension mismatch");
  const int tail_start = bspace.n_max - bspace.tail_margin;
  double pop = 0.0;
  for (int is = 0; is <= n_s; ++is)
    for (int nb = tail_start; nb < db; ++nb)
      pop += std::norm(psi[static_cast<Eigen::Index>(is) * db + nb]);
  return pop;
}

namespace {

// G = -iK with K hermitian, so e^{sG} v = exp(-i s K) v reuses the Hermitian
// Krylov engine. Validation lives here so the member can be built directly.
SparseHermitianOperator hermitian_part_of_generator(
    const std::shared_ptr<const SparseHermitianOperator>& op,
    const std::shared_ptr<const SparseHermitianOperator>& generator, int sign) {
  if (!op || !generator)
    fail(ErrorCode::invalid_argument, "conjugation: null operator");
  if (generator->symmetry() != Symmetry::anti_hermitian)
    fail(ErrorCode::invalid_argument,
         "conjugation generator must be anti-hermitian");
  if (generator->dim() != op->dim())
    fail(ErrorCode::invalid_argument, "conjugation: dimension mismatch");
  if (sign != 1 && sign != -1)
    fail(ErrorCode::invalid_argument, "conjugation sign must be +-1");
  return generator->scaled(cplx{0.0, 1.0}, Symmetry::hermitian);
}

}  // namespace

ConjugatedOperator::ConjugatedOperator(
    std::shared_ptr<const SparseHermitianOperator> op,
    std::shared_ptr<const SparseHermitianOperator> generator, int sign,
    PropagatorConfig cfg)
    : op_(std::move(op)),
      generator_(std::move(generator)),
      herm_generator_(hermitian_part_of_generator(op_, generator_, sign)),
      sign_(sign),
      cfg_(cfg) {}

void ConjugatedOperator::apply(const Vec& x, Vec& y) const {
  const Vec inner = expmv_unnormalized(herm_generator_, x, -sign_, cfg_);
  Vec mid(dim());
  op_->apply(inner, mid);
  y = expmv_unnormalized(herm_generator_, mid, sign_, cfg_);
}

}  // namespace ssq
