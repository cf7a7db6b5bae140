#pragma once

// Likelihood of a diffusion observed at a fixed step until it first crosses
// an upper threshold. A trajectory x0, x1, ..., x_{N-1} (all below b) that
// crosses during the N-th interval contributes
//
//   prod_{i=1}^{N-1} f^b(x_i, delta | x_{i-1}) * G(delta | x_{N-1}),
//
// where f^b = f * (1 - P(bridge crosses)) is the sub-density of surviving
// paths and G the one-step crossing probability.

#include <span>
#include <vector>

#include "killedfit/crossing.hpp"
#include "killedfit/models.hpp"

namespace killedfit {

struct KilledTrajectory {
  double x0 = 0.0;
  double delta = 1.0;
  double b = 0.0;
  /// Sub-threshold observations x_1 .. x_{N-1}; empty if the threshold was
  /// crossed before the first sample.
  std::vector<double> obs;
  /// Crossing observed after the last sample. Always true for simulated data.
  bool crossed = true;

  /// N, the index of the interval in which the crossing happened.
  std::size_t n_steps() const { return obs.size() + 1; }
  /// Throws DomainError naming the offending observation.
  void validate(ModelKind kind) const;

  bool operator==(const KilledTrajectory&) const = default;
};

struct LogLik {
  double value = 0.0;
  bool eval_ok = true;

  static LogLik failed();
  bool finite() const;
};

enum class Objective { Killed, Naive };

/// f^b(y, delta | x). Returns NaN when the free density cannot be evaluated.
double fb_density(const ModelSpec& model, double y, double x, double b, double delta,
                  BridgeMethod method, CrossingDiagnostics* diag = nullptr);
double log_fb_density(const ModelSpec& model, double y, double x, double b, double delta,
                      BridgeMethod method, CrossingDiagnostics* diag = nullptr);

LogLik loglik_killed(const ModelSpec& model, const KilledTrajectory& traj,
                     const CrossingMethod& method, CrossingDiagnostics* diag = nullptr);

/// Same value computed through the killed-chain transition density on the
/// augmented state space (sub-threshold states plus an absorbing coffin
/// state), one factor per step.
LogLik loglik_killed_chain(const ModelSpec& model, const KilledTrajectory& traj,
                           const CrossingMethod& method);

/// Product of free transition densities; the threshold is ignored.
LogLik loglik_naive(const ModelSpec& model, const KilledTrajectory& traj);

/// Sum over trajectories, accumulated in input order.
LogLik loglik_pooled(const ModelSpec& model, std::span<const KilledTrajectory> trajs,
                     const CrossingMethod& method, CrossingDiagnostics* diag = nullptr);

LogLik loglik(const ModelSpec& model, std::span<const KilledTrajectory> trajs,
              Objective objective, const CrossingMethod& method,
              CrossingDiagnostics* diag = nullptr);

/// Central finite-difference score of the pooled log-likelihood in the
/// natural parameters, step 1e-5 * max(1, |theta_i|). Throws NumericalError
/// if any perturbed evaluation fails.
std::vector<double> score_numeric(const ModelSpec& model,
                                  std::span<const KilledTrajectory> trajs,
                                  const CrossingMethod& method,
                                  Objective objective = Objective::Killed);

/// Average outer product of per-trajectory score vectors.
std::vector<std::vector<double>> sample_information(
    std::span<const std::vector<double>> scores);

}  // namespace killedfit
