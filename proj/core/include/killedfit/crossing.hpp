#pragma once

// Threshold-crossing probabilities over one sampling interval:
//
//  * bridge_crossing_prob: P(T_b < delta | X_0 = x, X_delta = y), the chance
//    that the continuous path touched b between two sub-threshold samples.
//  * g_prob: G(delta | x) = P(T_b <= delta | X_0 = x).
//
// Both are exact for the Wiener process with drift. For OU and SR they use
// small-delta approximations: the Baldi-Caramellino bridge expansion and the
// first-passage integral equation with its convolution term dropped.

#include <optional>

#include "killedfit/models.hpp"

namespace killedfit {

enum class BridgeMethod { ExactWD, BaldiCaramellino };
enum class GMethod { ExactWD, PsiApprox, DensityIntegral };

/// Second coefficient of the Psi kernel in the G approximation:
/// Printed uses mu(b) - sigma'(b)/4, SquaredDiffusion uses mu(b) - (sigma^2)'(b)/4.
enum class PsiCoefficient { Printed, SquaredDiffusion };

struct CrossingMethod {
  BridgeMethod bridge = BridgeMethod::BaldiCaramellino;
  GMethod g = GMethod::PsiApprox;
  PsiCoefficient psi = PsiCoefficient::Printed;

  /// Exact formulas for WD, Baldi-Caramellino + Psi approximation otherwise.
  static CrossingMethod default_for(ModelKind kind);
  /// Throws DomainError if an exact-WD method is paired with another model.
  void validate(ModelKind kind) const;
};

/// Per-call-context counters; pass one in to learn how often the
/// approximations had to be clamped into [0, 1].
struct CrossingDiagnostics {
  long clamp_events = 0;
  long negative_g = 0;
  long quadrature_failures = 0;
};

/// Closed-form correction term phi_b of the bridge expansion (0 for WD).
/// SR uses the y = x limit when |x - y| < 1e-8 * max(1, |x|).
double phi_b(const ModelSpec& model, double x, double y, double b);

/// Throws DomainError if x >= b or y >= b.
double bridge_crossing_prob(const ModelSpec& model, double x, double y, double b, double delta,
                            BridgeMethod method, CrossingDiagnostics* diag = nullptr);
double bridge_crossing_prob(const ModelSpec& model, double x, double y,
                            const ThresholdConfig& cfg, BridgeMethod method,
                            CrossingDiagnostics* diag = nullptr);

/// G(delta | x). Returns NaN (the evaluation-failure sentinel) if the time
/// quadrature does not converge or a special function fails.
double g_prob(const ModelSpec& model, double x, double b, double delta,
              const CrossingMethod& method, CrossingDiagnostics* diag = nullptr);
double g_prob(const ModelSpec& model, double x, const ThresholdConfig& cfg,
              const CrossingMethod& method, CrossingDiagnostics* diag = nullptr);

/// Exact WD first-passage distribution P(T_b <= t | X_0 = x).
double wd_first_passage_cdf(double mu, double sigma, double x, double b, double t);

/// Sum_{n>=1} n * P((n-1) delta < T_b <= n delta) for WD with mu > 0. The
/// series stops once the remaining tail mass is below 1e-10, or after
/// `max_steps` terms if given.
double discretized_mean_N(const ModelSpec& model, const ThresholdConfig& cfg,
                          std::optional<long> max_steps = std::nullopt);

}  // namespace killedfit
