#pragma once

// The three scalar diffusions supported by the library:
//
//   WD  dX = mu dt + sigma dW                       state space (-inf, inf)
//   OU  dX = (-beta X + mu) dt + sigma dW           state space (-inf, inf)
//   SR  dX = (-beta X + mu) dt + sigma sqrt(X) dW   state space (0, inf), 2 mu >= sigma^2
//
// ModelSpec is the single source of truth for drift, diffusion and the
// parameter constraints; everything else in the library dispatches on it.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace killedfit {

enum class ModelKind { WD, OU, SR };

std::string_view to_string(ModelKind kind);
/// Accepts "WD", "OU", "SR" (case-insensitive); throws ParseError otherwise.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::WD;
  double mu = 0.0;
  /// Inverse time constant; unused (and kept at 0) for WD.
  double beta = 0.0;
  double sigma = 1.0;

  static ModelSpec wd(double mu, double sigma) { return {ModelKind::WD, mu, 0.0, sigma}; }
  static ModelSpec ou(double mu, double beta, double sigma) {
    return {ModelKind::OU, mu, beta, sigma};
  }
  static ModelSpec sr(double mu, double beta, double sigma) {
    return {ModelKind::SR, mu, beta, sigma};
  }

  /// Parameter vector: WD (mu, sigma); OU and SR (mu, beta, sigma).
  std::vector<double> theta() const;
  static ModelSpec from_theta(ModelKind kind, std::span<const double> theta);

  /// sigma > 0, beta >= 0 and, for SR, 2 mu >= sigma^2 (all finite).
  bool feasible() const;
  /// Throws DomainError naming the violated constraint.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

std::size_t parameter_count(ModelKind kind);
std::vector<std::string> parameter_names(ModelKind kind);

struct ThresholdConfig {
  double b = 0.0;
  double x0 = 0.0;
  double delta = 1.0;

  /// x0 < b, delta > 0 and, for SR, 0 < x0 and 0 < b.
  void validate(ModelKind kind) const;
};

bool in_state_space(const ModelSpec& model, double x);

double drift(const ModelSpec& model, double x);
double diffusion(const ModelSpec& model, double x);
double diffusion_prime(const ModelSpec& model, double x);

/// sigma(y) * (mu/sigma - sigma'/2)'(y) + (mu/sigma - sigma'/2)^2(y), in
/// closed form per model.
double lambda_fn(const ModelSpec& model, double y);

// ---------------------------------------------------------------------------
// Free (unkilled) transition law
// ---------------------------------------------------------------------------

struct GaussianMoments {
  double mean;
  double variance;
};

/// Conditional mean and variance of X_dt given X_0 = x (exact for all models).
GaussianMoments conditional_moments(const ModelSpec& model, double x, double dt);

/// SR transition: X_dt * scale ~ chi'^2(dof, noncentrality).
struct SrTransitionParams {
  double dof;
  double noncentrality;
  double scale;
};
SrTransitionParams sr_transition_params(const ModelSpec& model, double x, double dt);

/// Transition law for a fixed (model, dt) with the x-independent constants
/// precomputed. Density evaluations return NaN when the special functions
/// cannot be evaluated to full precision.
class FreeTransition {
 public:
  FreeTransition(const ModelSpec& model, double dt);

  const ModelSpec& model() const { return model_; }
  double dt() const { return dt_; }

  double log_density(double y, double x) const;
  double density(double y, double x) const;
  /// P(X_dt > b | X_0 = x).
  double sf(double b, double x) const;
  GaussianMoments moments(double x) const;

 private:
  ModelSpec model_;
  double dt_;
  double decay_ = 1.0;      // exp(-beta dt)
  double mean_gain_ = 0.0;  // (1 - exp(-beta dt)) / beta
  double variance_ = 0.0;   // WD/OU conditional variance
  double log_sd_ = 0.0;
  double sr_scale_ = 0.0;   // 4 beta / (sigma^2 (1 - exp(-beta dt)))
  double sr_dof_ = 0.0;
};

double free_density(const ModelSpec& model, double y, double dt, double x);
double free_log_density(const ModelSpec& model, double y, double dt, double x);
/// P(X_dt > b | X_0 = x) under the free law.
double free_cdf_above(const ModelSpec& model, double b, double dt, double x);

/// Mean first-passage time E(T_b | X_0 = x0): closed form for WD, Siegert's
/// scale/speed double integral by adaptive quadrature (rel. tol 1e-8) for OU
/// and SR. Throws NumericalError when the mean is infinite or the quadrature
/// fails.
double mean_fpt(const ModelSpec& model, const ThresholdConfig& cfg);

}  // namespace killedfit
