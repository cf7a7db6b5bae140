#pragma once

// Killed-trajectory simulation. Paths are advanced on a sub-grid of step
// delta / substep_divisor; between two sub-threshold sub-steps a Bernoulli
// draw with the bridge crossing probability decides whether the continuous
// path touched b in between. Only the delta-grid points before the interval
// containing the crossing are kept.

#include <cstdint>
#include <span>
#include <vector>

#include "killedfit/likelihood.hpp"
#include "killedfit/models.hpp"
#include "killedfit/numerics.hpp"

namespace killedfit {

enum class Stepper { ExactTransition, Euler };

struct SimPlan {
  ModelSpec model;
  ThresholdConfig cfg;
  int substep_divisor = 10;
  std::size_t n_traj = 1;
  std::uint64_t seed = 1;
  Stepper stepper = Stepper::ExactTransition;
  /// Runaway guard on the number of sub-steps per trajectory.
  long max_substeps = 10'000'000;
  /// Draw the sub-step bridge Bernoulli; disable only for diagnostics.
  bool bridge_correction = true;

  void validate() const;
};

/// One draw of X_{t+dt} given X_t = x. The Euler stepper reflects SR states
/// that go non-positive to 1e-12.
double step(const ModelSpec& model, double x, double dt, Stepper stepper,
            numerics::KeyedStream& rng);

/// Simulates a single killed trajectory using `rng`. Throws NumericalError
/// when the runaway guard trips.
KilledTrajectory simulate_trajectory(const SimPlan& plan, numerics::KeyedStream& rng);

/// Trajectory i is drawn from KeyedStream(plan.seed, {i}), so the result
/// does not depend on `threads`.
std::vector<KilledTrajectory> simulate_killed(const SimPlan& plan, int threads = 1);

/// Same, with an extra key prefix: trajectory i uses (seed, {prefix..., i}).
std::vector<KilledTrajectory> simulate_killed(const SimPlan& plan,
                                              std::span<const std::uint64_t> key_prefix,
                                              int threads = 1);

}  // namespace killedfit
