#include "killedfit/simulate.hpp"

#include <cmath>
#include <limits>

#include "killedfit/crossing.hpp"
#include "killedfit/errors.hpp"
#include "killedfit/parallel.hpp"

namespace killedfit {

namespace nm = numerics;

namespace {

constexpr double kSrFloor = 1e-12;

// Stepping constants for a fixed (model, dt).
class Stepping {
 public:
  Stepping(const ModelSpec& model, double dt, Stepper stepper)
      : model_(model), dt_(dt), stepper_(stepper), sqrt_dt_(std::sqrt(dt)) {
    if (stepper == Stepper::Euler) return;
    if (model.kind == ModelKind::SR) {
      const auto p = sr_transition_params(model, 1.0, dt);
      scale_ = p.scale;
      half_dof_ = 0.5 * p.dof;
      nc_per_x_ = p.noncentrality;  // noncentrality is linear in x
    } else {
      const auto m0 = conditional_moments(model, 0.0, dt);
      const auto m1 = conditional_moments(model, 1.0, dt);
      offset_ = m0.mean;
      decay_ = m1.mean - m0.mean;
      sd_ = std::sqrt(m0.variance);
    }
  }

  double operator()(double x, nm::KeyedStream& rng) const {
    if (stepper_ == Stepper::Euler) {
      const double y = x + drift(model_, x) * dt_ + diffusion(model_, x) * sqrt_dt_ * rng.normal();
      if (model_.kind == ModelKind::SR && !(y > 0.0)) return kSrFloor;
      return y;
    }
    if (model_.kind != ModelKind::SR) return offset_ + decay_ * x + sd_ * rng.normal();
    // Non-central chi-square as a Poisson mixture of central ones.
    const long j = rng.poisson(0.5 * nc_per_x_ * x);
    const double chi2 = 2.0 * rng.gamma(half_dof_ + static_cast<double>(j));
    const double y = chi2 / scale_;
    return y > 0.0 ? y : std::numeric_limits<double>::min();
  }

 private:
  ModelSpec model_;
  double dt_;
  Stepper stepper_;
  double sqrt_dt_;
  double offset_ = 0.0;
  double decay_ = 1.0;
  double sd_ = 0.0;
  double scale_ = 1.0;
  double half_dof_ = 0.0;
  double nc_per_x_ = 0.0;
};

}  // namespace

void SimPlan::validate() const {
  model.validate();
  cfg.validate(model.kind);
  if (substep_divisor < 1) throw DomainError("substep divisor must be at least 1");
  if (max_substeps < 1) throw DomainError("max_substeps must be positive");
}

double step(const ModelSpec& model, double x, double dt, Stepper stepper,
            nm::KeyedStream& rng) {
  if (!in_state_space(model, x)) throw DomainError("step: state outside the state space");
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  return Stepping(model, dt, stepper)(x, rng);
}

KilledTrajectory simulate_trajectory(const SimPlan& plan, nm::KeyedStream& rng) {
  const double dt = plan.cfg.delta / plan.substep_divisor;
  const double b = plan.cfg.b;
  const Stepping next(plan.model, dt, plan.stepper);
  const BridgeMethod bridge = plan.model.kind == ModelKind::WD ? BridgeMethod::ExactWD
                                                               : BridgeMethod::BaldiCaramellino;

  KilledTrajectory traj{plan.cfg.x0, plan.cfg.delta, b, {}, true};
  double x = plan.cfg.x0;
  for (long j = 1; j <= plan.max_substeps; ++j) {
    const double y = next(x, rng);
    if (y >= b) return traj;
    if (plan.bridge_correction) {
      const double p = bridge_crossing_prob(plan.model, x, y, b, dt, bridge);
      if (rng.uniform() < p) return traj;
    }
    if (j % plan.substep_divisor == 0) traj.obs.push_back(y);
    x = y;
  }
  throw NumericalError("simulation exceeded " + std::to_string(plan.max_substeps) +
                       " sub-steps without crossing the threshold");
}

std::vector<KilledTrajectory> simulate_killed(const SimPlan& plan,
                                              std::span<const std::uint64_t> key_prefix,
                                              int threads) {
  plan.validate();
  std::vector<KilledTrajectory> out(plan.n_traj);
  parallel_for(plan.n_traj, threads, [&](std::size_t i) {
    std::vector<std::uint64_t> keys(key_prefix.begin(), key_prefix.end());
    keys.push_back(i);
    nm::KeyedStream rng(plan.seed, keys);
    out[i] = simulate_trajectory(plan, rng);
  });
  return out;
}

std::vector<KilledTrajectory> simulate_killed(const SimPlan& plan, int threads) {
  return simulate_killed(plan, std::span<const std::uint64_t>{}, threads);
}

}  // namespace killedfit
