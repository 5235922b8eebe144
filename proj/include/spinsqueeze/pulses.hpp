#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spinsqueeze/observables.hpp"
#include "spinsqueeze/propagate.hpp"
#include "spinsqueeze/spin_ops.hpp"

namespace ssq {

struct FreeSegment {
  double duration = 0.0;
};

struct RotationPulse {
  Axis axis = Axis::y;
  double angle = 0.0;
};

using Segment = std::variant<FreeSegment, RotationPulse>;

struct PulseSequence {
  std::vector<Segment> segments;
  std::string scheme;           // "echo", "tat", or free-form
  double period = 0.0;          // nominal period duration
  int segments_per_period = 0;  // 0: sample only at the end
  int clamp_events = 0;         // negative durations clamped by perturbation

  double total_duration() const;
  int count_rotations(double angle, double tol = 1e-12) const;

  nlohmann::json to_json() const;
  static PulseSequence from_json(const nlohmann::json& j);
};

// Relative Gaussian jitter: every rotation angle is scaled by (1 + eps),
// eps ~ N(0, sigma_area^2), every free duration by (1 + eps'),
// eps' ~ N(0, sigma_sep^2), all independent.
struct NoiseSpec {
  double sigma_area = 0.0;
  double sigma_sep = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// n_pulses repetitions of [Free(dt), Rotate(y, pi)]. Even counts restore
// the spin orientation; odd counts are refused unless explicitly allowed.
PulseSequence echo_sequence(int n_pulses, double dt, bool allow_odd = false);

// Periods of duration 6 dt emitting, in execution order,
//   R(pi/2), 4 x [R(pi), Free(dt)], R(-pi/2), 2 x [R(pi), Free(dt)],
// i.e. the right-to-left reading of [U R_pi]^2 R_{-pi/2} [U R_pi]^4 R_{pi/2}.
PulseSequence tat_sequence(int n_periods, double dt);

PulseSequence perturb_sequence(const PulseSequence& seq,
                               const NoiseSpec& noise);

struct SamplePolicy {
  enum class Kind { period_boundaries, every_free_segment };
  Kind kind = Kind::period_boundaries;
  int checkpoint_stride = 32;
};

// Walks the sequence: Free segments evolve under `h`, rotations apply a
// precomputed dense unitary to the S factor of the product state (the
// instantaneous-pulse idealization). Samples are stroboscopic by default.
SqueezingTrace apply_sequence(const LinearOperator& h, const Vec& psi0,
                              const PulseSequence& seq, const SpinSystem& sys,
                              const PropagatorConfig& cfg = {},
                              const SamplePolicy& policy = {});

// Same machinery on a bare (n_s+1)-dimensional ensemble (used when the
// effective single-ensemble Hamiltonians stand in for the full model).
SqueezingTrace apply_sequence(const LinearOperator& h, const Vec& psi0,
                              const PulseSequence& seq, int n_s,
                              const PropagatorConfig& cfg = {},
                              const SamplePolicy& policy = {});

// splitmix64 stream: deterministic per-(seed, index) values used to seed
// independent trajectory RNGs regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ssq
