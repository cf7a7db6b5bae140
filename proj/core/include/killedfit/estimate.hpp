#pragma once

// Derivative-free maximum likelihood for killed trajectories.
//
// The simplex works in transformed coordinates: mu as is, log(sigma) and,
// for OU/SR, log(beta) with values below -40 mapped to beta = 0 so that the
// boundary estimate beta = 0 is reachable. The SR constraint 2 mu >= sigma^2
// is not transformed away; violating points evaluate to +inf and the simplex
// moves back into the feasible region.

#include <span>
#include <vector>

#include "killedfit/crossing.hpp"
#include "killedfit/likelihood.hpp"
#include "killedfit/models.hpp"
#include "killedfit/numerics.hpp"

namespace killedfit {

struct FitOptions {
  numerics::NelderMeadOptions nelder_mead{};
  /// Restart once from the incumbent when the first run exhausts max_evals.
  bool restart_on_max_evals = true;
  double initial_rel_step = 0.05;
  double initial_abs_step = 0.01;
};

struct FitResult {
  ModelSpec theta_hat;
  double loglik = 0.0;
  Objective method = Objective::Killed;
  bool converged = false;
  int n_evals = 0;
  int n_restarts = 0;
  /// beta_hat at 0 or, for SR, 2 mu_hat = sigma_hat^2 (within 1e-6).
  bool boundary_flag = false;
  CrossingDiagnostics diagnostics{};
};

/// Closed-form starting values computed from one trajectory. Trajectories
/// with fewer than three observations, or whose moment ratios are degenerate,
/// fall back to heuristic values; this never throws for valid input.
ModelSpec initial_estimate(ModelKind kind, const KilledTrajectory& traj);

/// Componentwise median of the per-trajectory starting values.
ModelSpec initial_estimate(ModelKind kind, std::span<const KilledTrajectory> trajs);

/// Maximizes the pooled killed (or naive) log-likelihood of `trajs`.
/// Throws DomainError for an empty trajectory list or an invalid method.
FitResult fit(ModelKind kind, std::span<const KilledTrajectory> trajs, Objective objective,
              const CrossingMethod& method, const FitOptions& opts = {});

/// Same, starting from a caller-supplied point.
FitResult fit_from(const ModelSpec& start, std::span<const KilledTrajectory> trajs,
                   Objective objective, const CrossingMethod& method,
                   const FitOptions& opts = {});

}  // namespace killedfit
