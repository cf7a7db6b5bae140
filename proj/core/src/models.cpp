#include "killedfit/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "killedfit/errors.hpp"
#include "killedfit/numerics.hpp"

namespace killedfit {

namespace nm = numerics;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::WD:
      return "WD";
    case ModelKind::OU:
      return "OU";
    case ModelKind::SR:
      return "SR";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "WD") return ModelKind::WD;
  if (up == "OU") return ModelKind::OU;
  if (up == "SR" || up == "CIR") return ModelKind::SR;
  throw ParseError("unknown model kind '" + std::string(name) + "' (expected WD, OU or SR)");
}

std::size_t parameter_count(ModelKind kind) { return kind == ModelKind::WD ? 2 : 3; }

std::vector<std::string> parameter_names(ModelKind kind) {
  if (kind == ModelKind::WD) return {"mu", "sigma"};
  return {"mu", "beta", "sigma"};
}

std::vector<double> ModelSpec::theta() const {
  if (kind == ModelKind::WD) return {mu, sigma};
  return {mu, beta, sigma};
}

ModelSpec ModelSpec::from_theta(ModelKind kind, std::span<const double> theta) {
  if (theta.size() != parameter_count(kind)) {
    throw DomainError("parameter vector has wrong length for model " +
                      std::string(to_string(kind)));
  }
  if (kind == ModelKind::WD) return wd(theta[0], theta[1]);
  return {kind, theta[0], theta[1], theta[2]};
}

bool ModelSpec::feasible() const {
  if (!std::isfinite(mu) || !std::isfinite(beta) || !std::isfinite(sigma)) return false;
  if (!(sigma > 0.0)) return false;
  if (kind == ModelKind::WD) return true;
  if (beta < 0.0) return false;
  if (kind == ModelKind::SR && 2.0 * mu < sigma * sigma) return false;
  return true;
}

void ModelSpec::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(beta) || !std::isfinite(sigma)) {
    throw DomainError("model parameters must be finite");
  }
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (kind != ModelKind::WD && beta < 0.0) throw DomainError("beta must be non-negative");
  if (kind == ModelKind::SR && 2.0 * mu < sigma * sigma) {
    throw DomainError("SR model requires 2 mu >= sigma^2");
  }
}

void ThresholdConfig::validate(ModelKind kind) const {
  if (!std::isfinite(x0) || std::isnan(b)) throw DomainError("x0 and b must be numbers");
  if (!(x0 < b)) throw DomainError("initial state must lie below the threshold");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  if (kind == ModelKind::SR && !(x0 > 0.0)) {
    throw DomainError("SR model requires a positive initial state");
  }
}

bool in_state_space(const ModelSpec& model, double x) {
  if (std::isnan(x)) return false;
  return model.kind != ModelKind::SR || x >= 0.0;
}

double drift(const ModelSpec& model, double x) {
  if (!in_state_space(model, x)) throw DomainError("drift: state outside the state space");
  if (model.kind == ModelKind::WD) return model.mu;
  return model.mu - model.beta * x;
}

double diffusion(const ModelSpec& model, double x) {
  if (!in_state_space(model, x)) throw DomainError("diffusion: state outside the state space");
  if (model.kind == ModelKind::SR) return model.sigma * std::sqrt(x);
  return model.sigma;
}

double diffusion_prime(const ModelSpec& model, double x) {
  if (model.kind == ModelKind::SR) {
    if (!(x > 0.0)) throw DomainError("diffusion derivative is singular at x <= 0 for SR");
    return model.sigma / (2.0 * std::sqrt(x));
  }
  if (std::isnan(x)) throw DomainError("diffusion_prime: NaN state");
  return 0.0;
}

double lambda_fn(const ModelSpec& model, double y) {
  const double s2 = model.sigma * model.sigma;
  switch (model.kind) {
    case ModelKind::WD:
      return model.mu * model.mu / s2;
    case ModelKind::OU: {
      const double m = model.mu - model.beta * y;
      return -model.beta + m * m / s2;
    }
    case ModelKind::SR: {
      if (!(y > 0.0)) throw DomainError("lambda: SR requires y > 0");
      // h(y) = (a - beta y) / (sigma sqrt(y)) with a = mu - sigma^2/4;
      // lambda = sigma sqrt(y) h' + h^2.
      const double a = model.mu - 0.25 * s2;
      const double m = a - model.beta * y;
      return -a / (2.0 * y) - 0.5 * model.beta + m * m / (s2 * y);
    }
  }
  return nm::kNaN;
}

// ---------------------------------------------------------------------------

GaussianMoments conditional_moments(const ModelSpec& model, double x, double dt) {
  const double s2 = model.sigma * model.sigma;
  if (model.kind == ModelKind::WD) return {x + model.mu * dt, s2 * dt};
  const double decay = std::exp(-model.beta * dt);
  const double gain = nm::one_minus_exp_over_rate(model.beta, dt);
  const double mean = x * decay + model.mu * gain;
  if (model.kind == ModelKind::OU) {
    return {mean, s2 * nm::one_minus_exp_over_rate(2.0 * model.beta, dt)};
  }
  // SR: Var = sigma^2 [x e^{-bt} (1 - e^{-bt}) / b + mu (1 - e^{-bt})^2 / (2 b^2)]
  const double var = s2 * (x * decay * gain + 0.5 * model.mu * gain * gain);
  return {mean, var};
}

SrTransitionParams sr_transition_params(const ModelSpec& model, double x, double dt) {
  const double s2 = model.sigma * model.sigma;
  const double gain = nm::one_minus_exp_over_rate(model.beta, dt);
  const double scale = 4.0 / (s2 * gain);
  return {4.0 * model.mu / s2, x * scale * std::exp(-model.beta * dt), scale};
}

FreeTransition::FreeTransition(const ModelSpec& model, double dt) : model_(model), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("transition step must be positive");
  const double s2 = model.sigma * model.sigma;
  switch (model.kind) {
    case ModelKind::WD:
      mean_gain_ = dt;
      variance_ = s2 * dt;
      break;
    case ModelKind::OU:
      decay_ = std::exp(-model.beta * dt);
      mean_gain_ = nm::one_minus_exp_over_rate(model.beta, dt);
      variance_ = s2 * nm::one_minus_exp_over_rate(2.0 * model.beta, dt);
      break;
    case ModelKind::SR:
      decay_ = std::exp(-model.beta * dt);
      mean_gain_ = nm::one_minus_exp_over_rate(model.beta, dt);
      sr_scale_ = 4.0 / (s2 * mean_gain_);
      sr_dof_ = 4.0 * model.mu / s2;
      break;
  }
  log_sd_ = 0.5 * std::log(variance_);
}

GaussianMoments FreeTransition::moments(double x) const {
  return conditional_moments(model_, x, dt_);
}

double FreeTransition::log_density(double y, double x) const {
  if (model_.kind != ModelKind::SR) {
    const double mean = model_.kind == ModelKind::WD ? x + model_.mu * dt_
                                                     : x * decay_ + model_.mu * mean_gain_;
    const double z = (y - mean) / std::sqrt(variance_);
    return nm::normal_log_pdf(z) - log_sd_;
  }
  if (!(x >= 0.0) || !(y >= 0.0)) return y < 0.0 ? -nm::kInf : nm::kNaN;
  const double noncentrality = x * sr_scale_ * decay_;
  const double lp = nm::ncx2_log_pdf(sr_scale_ * y, sr_dof_, noncentrality);
  if (std::isnan(lp)) return nm::kNaN;
  return lp + std::log(sr_scale_);
}

double FreeTransition::density(double y, double x) const {
  const double lp = log_density(y, x);
  return std::isnan(lp) ? nm::kNaN : std::exp(lp);
}

double FreeTransition::sf(double b, double x) const {
  if (model_.kind != ModelKind::SR) {
    const double mean = model_.kind == ModelKind::WD ? x + model_.mu * dt_
                                                     : x * decay_ + model_.mu * mean_gain_;
    return nm::normal_sf((b - mean) / std::sqrt(variance_));
  }
  if (!(x >= 0.0)) return nm::kNaN;
  return nm::ncx2_sf(sr_scale_ * b, sr_dof_, x * sr_scale_ * decay_);
}

double free_density(const ModelSpec& model, double y, double dt, double x) {
  return FreeTransition(model, dt).density(y, x);
}

double free_log_density(const ModelSpec& model, double y, double dt, double x) {
  return FreeTransition(model, dt).log_density(y, x);
}

double free_cdf_above(const ModelSpec& model, double b, double dt, double x) {
  if (b == -nm::kInf) return 1.0;
  if (b == nm::kInf) return 0.0;
  return FreeTransition(model, dt).sf(b, x);
}

// ---------------------------------------------------------------------------

double mean_fpt(const ModelSpec& model, const ThresholdConfig& cfg) {
  model.validate();
  cfg.validate(model.kind);
  const double s2 = model.sigma * model.sigma;
  const nm::QuadratureSpec spec{1e-300, 1e-8, 50};

  if (model.kind == ModelKind::WD || (model.kind == ModelKind::OU && model.beta == 0.0)) {
    if (!(model.mu > 0.0)) {
      throw NumericalError("mean first-passage time is infinite for non-positive drift");
    }
    return (cfg.b - cfg.x0) / model.mu;
  }

  nm::QuadratureResult outer;
  if (model.kind == ModelKind::OU) {
    // s(y) * int_{-inf}^{y} m(z) dz in closed form via the scaled complementary
    // error function.
    const double c = model.beta / s2;
    const double level = model.mu / model.beta;
    const double pref = (2.0 / s2) * std::sqrt(M_PI / c) * 0.5;
    outer = nm::adaptive_simpson(
        [&](double y) { return pref * nm::erfcx(-std::sqrt(c) * (y - level)); }, cfg.x0, cfg.b,
        spec);
  } else {
    // SR, inner integral over t = z / y in (0, 1]:
    // (2/sigma^2) int_0^1 t^{nu - 1} exp(2 beta y (1 - t) / sigma^2) dt, nu = 2 mu / sigma^2.
    const double nu = 2.0 * model.mu / s2;
    bool inner_ok = true;
    outer = nm::adaptive_simpson(
        [&](double y) {
          const double rate = 2.0 * model.beta * y / s2;
          auto inner = nm::adaptive_simpson(
              [&](double t) {
                if (t <= 0.0) return nu == 1.0 ? std::exp(rate) : 0.0;
                return std::exp((nu - 1.0) * std::log(t) + rate * (1.0 - t));
              },
              0.0, 1.0, spec);
          inner_ok = inner_ok && inner.converged;
          return (2.0 / s2) * inner.value;
        },
        cfg.x0, cfg.b, spec);
    if (!inner_ok) throw NumericalError("mean_fpt: inner quadrature did not converge");
  }
  if (!outer.converged || !std::isfinite(outer.value)) {
    throw NumericalError("mean_fpt: quadrature did not converge");
  }
  return outer.value;
}

}  // namespace killedfit
