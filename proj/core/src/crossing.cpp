#include "killedfit/crossing.hpp"

#include <algorithm>
#include <cmath>

#include "killedfit/errors.hpp"
#include "killedfit/likelihood.hpp"
#include "killedfit/numerics.hpp"

namespace killedfit {

namespace nm = numerics;

CrossingMethod CrossingMethod::default_for(ModelKind kind) {
  if (kind == ModelKind::WD) return {BridgeMethod::ExactWD, GMethod::ExactWD};
  return {BridgeMethod::BaldiCaramellino, GMethod::PsiApprox};
}

void CrossingMethod::validate(ModelKind kind) const {
  if (kind != ModelKind::WD && (bridge == BridgeMethod::ExactWD || g == GMethod::ExactWD)) {
    throw DomainError("exact WD crossing formulas require the WD model");
  }
}

namespace {

double clamp_probability(double p, CrossingDiagnostics* diag) {
  if (std::isnan(p)) return p;
  if (p < 0.0 || p > 1.0) {
    if (diag) ++diag->clamp_events;
    return std::clamp(p, 0.0, 1.0);
  }
  return p;
}

// int_z^b lambda(u) / sigma(u) du for SR, via the antiderivative of
// A u^{-3/2} + B u^{-1/2} + C u^{1/2}.
double sr_lambda_over_sigma_integral(const ModelSpec& m, double z, double b) {
  const double s = m.sigma;
  const double s2 = s * s;
  const double a = m.mu - 0.25 * s2;
  const double A = (a * a / s2 - 0.5 * a) / s;
  const double B = (-0.5 * m.beta - 2.0 * a * m.beta / s2) / s;
  const double C = m.beta * m.beta / (s2 * s);
  auto anti = [&](double u) {
    const double r = std::sqrt(u);
    return -2.0 * A / r + 2.0 * B * r + (2.0 / 3.0) * C * u * r;
  };
  return anti(b) - anti(z);
}

}  // namespace

double phi_b(const ModelSpec& model, double x, double y, double b) {
  switch (model.kind) {
    case ModelKind::WD:
      // lambda is constant, so both averages in the generic expression agree.
      return 0.0;
    case ModelKind::OU: {
      const double be = model.beta;
      const double s2 = model.sigma * model.sigma;
      return -be * (b - x) * (b - y) * (be * (b + x + y) - 3.0 * model.mu) /
             (3.0 * s2 * (2.0 * b - x - y));
    }
    case ModelKind::SR: {
      if (!(x > 0.0) || !(y > 0.0)) throw DomainError("phi_b: SR requires positive states");
      const double s2 = model.sigma * model.sigma;
      if (std::abs(x - y) < 1e-8 * std::max(1.0, std::abs(x))) {
        const double mid = 0.5 * (x + y);
        const double inv_sigma_int = 2.0 * (std::sqrt(b) - std::sqrt(mid)) / model.sigma;
        return 0.5 * (lambda_fn(model, mid) -
                      sr_lambda_over_sigma_integral(model, mid, b) / inv_sigma_int);
      }
      const double b2 = model.beta * model.beta;
      const double common = -3.0 * s2 * model.mu + (9.0 / 16.0) * s2 * s2 + 3.0 * model.mu * model.mu;
      const double sx = std::sqrt(x);
      const double sy = std::sqrt(y);
      const double sb = std::sqrt(b);
      const double num = sx * (b - y) * (y * b2 * b + common) - sy * (b - x) * (x * b2 * b + common) -
                         sb * (x - y) * (x * y * b2 + common);
      const double sx_minus_sy = (x - y) / (sx + sy);
      const double den = 3.0 * s2 * std::sqrt(x * y * b) * sx_minus_sy * (-2.0 * sb + sx + sy);
      return -num / den;
    }
  }
  return nm::kNaN;
}

double bridge_crossing_prob(const ModelSpec& model, double x, double y, double b, double delta,
                            BridgeMethod method, CrossingDiagnostics* diag) {
  if (!(x < b) || !(y < b)) {
    throw DomainError("bridge crossing probability requires both endpoints below the threshold");
  }
  if (!(delta > 0.0)) throw DomainError("bridge crossing probability requires delta > 0");
  if (method == BridgeMethod::ExactWD && model.kind != ModelKind::WD) {
    throw DomainError("exact bridge formula is only valid for WD");
  }
  const double s2 = model.sigma * model.sigma;
  double exponent;
  if (model.kind == ModelKind::SR) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("SR bridge requires positive states");
    const double sb = std::sqrt(b);
    const double dx = (b - x) / (sb + std::sqrt(x));
    const double dy = (b - y) / (sb + std::sqrt(y));
    exponent = -8.0 * dx * dy / (s2 * delta);
  } else {
    exponent = -2.0 * (b - x) * (b - y) / (s2 * delta);
  }
  const double base = std::exp(exponent);
  if (method == BridgeMethod::ExactWD) return base;
  const double p = base * (1.0 + delta * phi_b(model, x, y, b));
  return clamp_probability(p, diag);
}

double bridge_crossing_prob(const ModelSpec& model, double x, double y,
                            const ThresholdConfig& cfg, BridgeMethod method,
                            CrossingDiagnostics* diag) {
  return bridge_crossing_prob(model, x, y, cfg.b, cfg.delta, method, diag);
}

double wd_first_passage_cdf(double mu, double sigma, double x, double b, double t) {
  if (x >= b) return 1.0;
  if (!(t > 0.0)) return 0.0;
  const double d = b - x;
  const double sd = sigma * std::sqrt(t);
  const double z1 = (d - mu * t) / sd;
  const double z2 = (d + mu * t) / sd;
  double second;
  if (z2 >= 0.0) {
    // exp(2 mu d / sigma^2) * Phibar(z2) == 0.5 erfcx(z2/sqrt2) exp(-z1^2/2)
    second = 0.5 * nm::erfcx(z2 / M_SQRT2) * std::exp(-0.5 * z1 * z1);
  } else {
    second = std::exp(2.0 * mu * d / (sigma * sigma)) * nm::normal_sf(z2);
  }
  return std::clamp(nm::normal_sf(z1) + second, 0.0, 1.0);
}

namespace {

double psi_approx(const ModelSpec& model, double x, double b, double delta,
                  const CrossingMethod& method, CrossingDiagnostics* diag) {
  double coef = drift(model, b);
  if (method.psi == PsiCoefficient::Printed) {
    coef -= 0.25 * diffusion_prime(model, b);
  } else if (model.kind == ModelKind::SR) {
    coef -= 0.25 * model.sigma * model.sigma;  // (sigma^2 x)' = sigma^2
  }

  const double tail = FreeTransition(model, delta).sf(b, x);
  if (std::isnan(tail)) return nm::kNaN;

  // r = u^2 removes the r^{-1/2} shape of f(b, r | x) at small r; for x close
  // to b its peak sits near u = (b - x)/sigma(b).
  const nm::QuadratureSpec spec{1e-300, 1e-10, 40};
  auto integrand = [&](double u) {
    const double r = u * u;
    if (r <= 0.0) return 0.0;
    return 2.0 * u * FreeTransition(model, r).density(b, x);
  };
  const auto q = nm::adaptive_gauss_kronrod(integrand, 0.0, std::sqrt(delta), spec);
  if (!q.converged || std::isnan(q.value)) {
    if (diag) ++diag->quadrature_failures;
    return nm::kNaN;
  }
  const double g = 2.0 * tail - coef * q.value;
  if (g < 0.0 && diag) ++diag->negative_g;
  return clamp_probability(g, diag);
}

double density_integral(const ModelSpec& model, double x, double b, double delta,
                        const CrossingMethod& method, CrossingDiagnostics* diag) {
  double lower;
  if (model.kind == ModelKind::SR) {
    lower = 0.0;
  } else {
    const auto mom = conditional_moments(model, x, delta);
    lower = std::min(x, mom.mean) - 14.0 * std::sqrt(mom.variance);
  }
  const nm::QuadratureSpec spec{1e-13, 1e-11, 40};
  auto integrand = [&](double y) {
    if (y >= b) return 0.0;
    if (model.kind == ModelKind::SR && y <= 0.0) return 0.0;
    return fb_density(model, y, x, b, delta, method.bridge, diag);
  };
  const auto q = nm::adaptive_gauss_kronrod(integrand, lower, b, spec);
  if (!q.converged || std::isnan(q.value)) {
    if (diag) ++diag->quadrature_failures;
    return nm::kNaN;
  }
  return clamp_probability(1.0 - q.value, diag);
}

}  // namespace

double g_prob(const ModelSpec& model, double x, double b, double delta,
              const CrossingMethod& method, CrossingDiagnostics* diag) {
  if (!(x < b)) throw DomainError("g_prob requires x below the threshold");
  if (!(delta > 0.0)) throw DomainError("g_prob requires delta > 0");
  switch (method.g) {
    case GMethod::ExactWD:
      if (model.kind != ModelKind::WD) throw DomainError("exact G formula is only valid for WD");
      return wd_first_passage_cdf(model.mu, model.sigma, x, b, delta);
    case GMethod::PsiApprox:
      return psi_approx(model, x, b, delta, method, diag);
    case GMethod::DensityIntegral:
      return density_integral(model, x, b, delta, method, diag);
  }
  return nm::kNaN;
}

double g_prob(const ModelSpec& model, double x, const ThresholdConfig& cfg,
              const CrossingMethod& method, CrossingDiagnostics* diag) {
  return g_prob(model, x, cfg.b, cfg.delta, method, diag);
}

double discretized_mean_N(const ModelSpec& model, const ThresholdConfig& cfg,
                          std::optional<long> max_steps) {
  if (model.kind != ModelKind::WD) {
    throw DomainError("discretized mean step count is only available for WD");
  }
  model.validate();
  cfg.validate(model.kind);
  if (!(model.mu > 0.0)) {
    throw NumericalError("discretized mean step count is infinite for non-positive drift");
  }
  constexpr long kHardLimit = 200'000'000;
  const long limit = max_steps ? std::min(*max_steps, kHardLimit) : kHardLimit;

  double sum = 0.0;
  double prev = 0.0;
  for (long n = 1; n <= limit; ++n) {
    const double cur = wd_first_passage_cdf(model.mu, model.sigma, cfg.x0, cfg.b, n * cfg.delta);
    sum += static_cast<double>(n) * (cur - prev);
    prev = cur;
    if (!max_steps && 1.0 - cur < 1e-10) return sum;
  }
  if (!max_steps) throw NumericalError("discretized mean step count did not converge");
  return sum;
}

}  // namespace killedfit
