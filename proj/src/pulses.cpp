#include "spinsqueeze/pulses.hpp"

#include <cmath>
#include <random>

namespace ssq {

using nlohmann::json;

double PulseSequence::total_duration() const {
  double total = 0.0;
  for (const auto& seg : segments)
    if (const auto* f = std::get_if<FreeSegment>(&seg)) total += f->duration;
  return total;
}

int PulseSequence::count_rotations(double angle, double tol) const {
  int count = 0;
  for (const auto& seg : segments)
    if (const auto* r = std::get_if<RotationPulse>(&seg))
      if (std::abs(r->angle - angle) <= tol) ++count;
  return count;
}

json PulseSequence::to_json() const {
  json segs = json::array();
  for (const auto& seg : segments) {
    if (const auto* f = std::get_if<FreeSegment>(&seg))
      segs.push_back({{"type", "free"}, {"duration", f->duration}});
    else if (const auto* r = std::get_if<RotationPulse>(&seg))
      segs.push_back({{"type", "rotate"},
                      {"axis", axis_name(r->axis)},
                      {"angle", r->angle}});
  }
  return json{{"scheme", scheme},
              {"period", period},
              {"segments_per_period", segments_per_period},
              {"clamp_events", clamp_events},
              {"segments", std::move(segs)}};
}

PulseSequence PulseSequence::from_json(const json& j) {
  PulseSequence seq;
  seq.scheme = j.value("scheme", "");
  seq.period = j.value("period", 0.0);
  seq.segments_per_period = j.value("segments_per_period", 0);
  seq.clamp_events = j.value("clamp_events", 0);
  for (const auto& s : j.at("segments")) {
    const std::string type = s.at("type").get<std::string>();
    if (type == "free") {
      const double d = s.at("duration").get<double>();
      if (d < 0) fail(ErrorCode::invalid_argument, "negative free duration");
      seq.segments.emplace_back(FreeSegment{d});
    } else if (type == "rotate") {
      seq.segments.emplace_back(RotationPulse{
          axis_from_name(s.at("axis").get<std::string>()),
          s.at("angle").get<double>()});
    } else {
      fail(ErrorCode::invalid_argument, "unknown segment type '" + type + "'");
    }
  }
  return seq;
}

void NoiseSpec::validate() const {
  if (sigma_area < 0 || sigma_sep < 0)
    fail(ErrorCode::invalid_argument, "noise sigmas must be nonnegative");
}

PulseSequence echo_sequence(int n_pulses, double dt, bool allow_odd) {
  if (n_pulses < 2)
    fail(ErrorCode::invalid_argument, "echo_sequence needs n_pulses >= 2");
  if (n_pulses % 2 != 0 && !allow_odd)
    fail(ErrorCode::invalid_argument,
         "odd pulse count leaves the spin orientation flipped; pass "
         "allow_odd to override");
  if (dt <= 0) fail(ErrorCode::invalid_argument, "echo_sequence: dt > 0 required");
  PulseSequence seq;
  seq.scheme = "echo";
  seq.period = 2.0 * dt;       // pulse pairs restore the orientation
  seq.segments_per_period = 4; // [Free, Rpi, Free, Rpi]
  seq.segments.reserve(static_cast<std::size_t>(n_pulses) * 2);
  for (int i = 0; i < n_pulses; ++i) {
    seq.segments.emplace_back(FreeSegment{dt});
    seq.segments.emplace_back(RotationPulse{Axis::y, M_PI});
  }
  return seq;
}

PulseSequence tat_sequence(int n_periods, double dt) {
  if (n_periods < 1)
    fail(ErrorCode::invalid_argument, "tat_sequence needs n_periods >= 1");
  if (dt <= 0) fail(ErrorCode::invalid_argument, "tat_sequence: dt > 0 required");
  PulseSequence seq;
  seq.scheme = "tat";
  seq.period = 6.0 * dt;
  seq.segments_per_period = 14;
  seq.segments.reserve(static_cast<std::size_t>(n_periods) * 14);
  for (int p = 0; p < n_periods; ++p) {
    // execution order of [U R_pi]^2 R_{-pi/2} [U R_pi]^4 R_{pi/2}
    seq.segments.emplace_back(RotationPulse{Axis::y, M_PI / 2});
    for (int i = 0; i < 4; ++i) {
      seq.segments.emplace_back(RotationPulse{Axis::y, M_PI});
      seq.segments.emplace_back(FreeSegment{dt});
    }
    seq.segments.emplace_back(RotationPulse{Axis::y, -M_PI / 2});
    for (int i = 0; i < 2; ++i) {
      seq.segments.emplace_back(RotationPulse{Axis::y, M_PI});
      seq.segments.emplace_back(FreeSegment{dt});
    }
  }
  return seq;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PulseSequence perturb_sequence(const PulseSequence& seq,
                               const NoiseSpec& noise) {
  noise.validate();
  PulseSequence out = seq;
  out.clamp_events = 0;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (auto& seg : out.segments) {
    // one draw per segment regardless of the sigmas, so sigma = 0
    // reproduces the nominal sequence on the identical stream
    const double z = unit(rng);
    if (auto* f = std::get_if<FreeSegment>(&seg)) {
      f->duration *= 1.0 + noise.sigma_sep * z;
      if (f->duration < 0) {
        f->duration = 0.0;
        ++out.clamp_events;
      }
    } else if (auto* r = std::get_if<RotationPulse>(&seg)) {
      r->angle *= 1.0 + noise.sigma_area * z;
    }
  }
  return out;
}

namespace {

// Precomputed spectral decomposition per axis; a pulse unitary is then two
// small dense products regardless of its (possibly noisy) angle.
class RotationApplier {
 public:
  explicit RotationApplier(int n_s) : n_s_(n_s), dim_(n_s + 1) {}

  void apply(Vec& psi, Axis axis, double angle, Eigen::Index dim_j) {
    using RowMat =
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat> m(psi.data(), dim_, dim_j);
    if (axis == Axis::z) {
      const RVec mz = magnetic_numbers(n_s_);
      for (Eigen::Index r = 0; r < dim_; ++r)
        m.row(r) *= std::polar(1.0, -angle * mz[r]);
      return;
    }
    const auto& [evals, evecs] = eig(axis);
    Vec phases(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i)
      phases[i] = std::polar(1.0, -angle * evals[i]);
    m = evecs * (phases.asDiagonal() * (evecs.adjoint() * m));
  }

 private:
  const std::pair<RVec, Mat>& eig(Axis axis) {
    auto& slot = cache_[axis == Axis::x ? 0 : 1];
    if (slot.second.size() == 0) {
      const auto mats = spin_matrices(n_s_);
      Eigen::SelfAdjointEigenSolver<Mat> es(
          (axis == Axis::x ? mats.sx : mats.sy).to_dense());
      slot = {es.eigenvalues(), es.eigenvectors()};
    }
    return slot;
  }

  int n_s_;
  Eigen::Index dim_;
  std::pair<RVec, Mat> cache_[2];
};

SqueezingTrace apply_impl(const LinearOperator& h, const Vec& psi0,
                          const PulseSequence& seq, int n_s, Eigen::Index dim_j,
                          const PropagatorConfig& cfg,
                          const SamplePolicy& policy) {
  if (psi0.size() != h.dim() ||
      psi0.size() != static_cast<Eigen::Index>(n_s + 1) * dim_j)
    fail(ErrorCode::invalid_argument, "apply_sequence: dimension mismatch");

  SqueezingTrace trace;
  trace.scheme = seq.scheme;
  trace.period = seq.period;
  trace.checkpoint_stride = std::max(1, policy.checkpoint_stride);

  Vec psi = psi0;
  double t = 0.0;
  auto sample = [&](const Vec& state) {
    const auto m = collective_moments(state, n_s, dim_j);
    trace.times.push_back(t);
    trace.xi2.push_back(squeezing_parameter(m, n_s));
    trace.moments.push_back(m);
    const int idx = static_cast<int>(trace.times.size()) - 1;
    if (idx % trace.checkpoint_stride == 0) trace.checkpoints.emplace_back(idx, state);
  };
  sample(psi);

  RotationApplier rot(n_s);
  EvolveWorkspace ws;
  int seg_count = 0;
  double last_sampled = 0.0;
  for (const auto& seg : seq.segments) {
    if (const auto* f = std::get_if<FreeSegment>(&seg)) {
      if (f->duration > 0) psi = evolve(h, psi, f->duration, cfg, &ws);
      t += f->duration;
      if (policy.kind == SamplePolicy::Kind::every_free_segment) {
        sample(psi);
        last_sampled = t;
      }
    } else if (const auto* r = std::get_if<RotationPulse>(&seg)) {
      rot.apply(psi, r->axis, r->angle, dim_j);
    }
    ++seg_count;
    if (policy.kind == SamplePolicy::Kind::period_boundaries &&
        seq.segments_per_period > 0 &&
        seg_count % seq.segments_per_period == 0) {
      sample(psi);
      last_sampled = t;
    }
  }
  if (last_sampled < t) sample(psi);  // partial trailing period
  return trace;
}

}  // namespace

SqueezingTrace apply_sequence(const LinearOperator& h, const Vec& psi0,
                              const PulseSequence& seq, const SpinSystem& sys,
                              const PropagatorConfig& cfg,
                              const SamplePolicy& policy) {
  return apply_impl(h, psi0, seq, sys.n_s, sys.dim_j(), cfg, policy);
}

SqueezingTrace apply_sequence(const LinearOperator& h, const Vec& psi0,
                              const PulseSequence& seq, int n_s,
                              const PropagatorConfig& cfg,
                              const SamplePolicy& policy) {
  return apply_impl(h, psi0, seq, n_s, 1, cfg, policy);
}

}  // namespace ssq
