#include "killedfit/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "killedfit/errors.hpp"

namespace killedfit {

namespace nm = numerics;

namespace {

constexpr double kLogBetaFloor = -40.0;
constexpr double kSigma2Floor = 1e-8;
constexpr double kBetaFallback = 1e-4;

// x0, x1, ..., xn
std::vector<double> full_path(const KilledTrajectory& traj) {
  std::vector<double> x;
  x.reserve(traj.obs.size() + 1);
  x.push_back(traj.x0);
  x.insert(x.end(), traj.obs.begin(), traj.obs.end());
  return x;
}

ModelSpec fallback_estimate(ModelKind kind, const KilledTrajectory& traj) {
  // Treat the crossing as a final step to b: drift from the mean passage
  // speed, diffusion from quadratic variation.
  std::vector<double> x = full_path(traj);
  x.push_back(traj.b);
  const double big_n = static_cast<double>(traj.n_steps());
  const double mu = (traj.b - traj.x0) / (big_n * traj.delta);
  double qv = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) qv += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
  const double sigma = std::sqrt(std::max(qv / (big_n * traj.delta), kSigma2Floor));
  if (kind == ModelKind::WD) return ModelSpec::wd(mu, sigma);
  const double beta = 0.1;
  // Put the drift level at the observed mean so OU/SR start sub-threshold.
  const double level = nm::mean(x);
  double m = beta * level + mu;
  if (kind == ModelKind::SR) m = std::max(m, 0.6 * sigma * sigma);
  return {kind, m, beta, sigma};
}

ModelSpec initial_wd(const KilledTrajectory& traj) {
  const auto x = full_path(traj);
  const double n = static_cast<double>(x.size() - 1);
  const double mu = (x.back() - x.front()) / (n * traj.delta);
  double ss = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double r = x[i] - x[i - 1] - mu * traj.delta;
    ss += r * r;
  }
  const double s2 = std::max(ss / (n * traj.delta), kSigma2Floor);
  return ModelSpec::wd(mu, std::sqrt(s2));
}

std::optional<ModelSpec> initial_ou(const KilledTrajectory& traj) {
  const auto x = full_path(traj);
  const double n = static_cast<double>(x.size() - 1);
  const double xbar = nm::mean(x);
  double lag = 0.0;
  double var = 0.0;
  double qv = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    var += (x[i] - xbar) * (x[i] - xbar);
    if (i > 0) {
      lag += (x[i] - xbar) * (x[i - 1] - xbar);
      qv += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    }
  }
  if (!(var > 0.0)) return std::nullopt;
  const double ratio = lag / var;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) return std::nullopt;
  double beta = -std::log(ratio) / traj.delta;
  if (!(beta > 0.0)) beta = kBetaFallback;
  const double mu = beta * xbar;
  const double s2 = std::max(qv / (n * traj.delta), kSigma2Floor);
  return ModelSpec::ou(mu, beta, std::sqrt(s2));
}

std::optional<ModelSpec> initial_sr(const KilledTrajectory& traj) {
  const auto x = full_path(traj);
  const std::size_t n = x.size() - 1;
  const double nd = static_cast<double>(n);
  double s_ratio = 0.0, s_x = 0.0, s_inv_prev = 0.0, s_prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (!(x[i - 1] > 0.0)) return std::nullopt;
    s_ratio += x[i] / x[i - 1];
    s_x += x[i];
    s_inv_prev += 1.0 / x[i - 1];
    s_prev += x[i - 1];
  }
  const double num = nd * s_ratio - s_x * s_inv_prev;
  const double den = nd * nd - s_prev * s_inv_prev;
  double beta = kBetaFallback;
  if (den != 0.0) {
    const double arg = num / den;
    if (arg > 0.0 && std::isfinite(arg)) {
      const double b = -std::log(arg) / traj.delta;
      if (b > 0.0) beta = b;
    }
  }
  const double decay = std::exp(-beta * traj.delta);
  const double one_minus = -std::expm1(-beta * traj.delta);
  // Long-run level mu/beta from the conditional-mean regression.
  const double level = s_x / nd + decay * (x.back() - x.front()) / (nd * one_minus);
  const double mu = beta * level;

  double num_s = 0.0, den_s = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double w = 1.0 / x[i - 1];
    const double r = x[i] - decay * x[i - 1] - level * one_minus;
    num_s += w * r * r;
    den_s += w * (level * one_minus + 2.0 * decay * x[i - 1]);
  }
  double s2 = 2.0 * beta * num_s / (one_minus * den_s);
  if (!std::isfinite(s2) || !std::isfinite(mu)) return std::nullopt;
  s2 = std::max(s2, kSigma2Floor);
  const double sigma = std::sqrt(s2);
  return ModelSpec::sr(std::max(mu, 0.6 * s2), beta, sigma);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return nm::quantile_sorted(v, 0.5);
}

std::vector<double> to_search(const ModelSpec& m) {
  if (m.kind == ModelKind::WD) return {m.mu, std::log(m.sigma)};
  const double lb = m.beta > 0.0 ? std::max(std::log(m.beta), kLogBetaFloor) : kLogBetaFloor;
  return {m.mu, lb, std::log(m.sigma)};
}

ModelSpec from_search(ModelKind kind, std::span<const double> u) {
  if (kind == ModelKind::WD) return ModelSpec::wd(u[0], std::exp(u[1]));
  const double beta = u[1] <= kLogBetaFloor ? 0.0 : std::exp(u[1]);
  return {kind, u[0], beta, std::exp(u[2])};
}

std::vector<std::vector<double>> initial_simplex(const ModelSpec& start, const FitOptions& opts) {
  const std::vector<double> theta = start.theta();
  std::vector<std::vector<double>> simplex;
  simplex.push_back(to_search(start));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> t = theta;
    t[i] = t[i] != 0.0 ? t[i] * (1.0 + opts.initial_rel_step) : opts.initial_abs_step;
    simplex.push_back(to_search(ModelSpec::from_theta(start.kind, t)));
  }
  return simplex;
}

}  // namespace

ModelSpec initial_estimate(ModelKind kind, const KilledTrajectory& traj) {
  if (traj.obs.size() < 3) return fallback_estimate(kind, traj);
  std::optional<ModelSpec> est;
  switch (kind) {
    case ModelKind::WD:
      est = initial_wd(traj);
      break;
    case ModelKind::OU:
      est = initial_ou(traj);
      break;
    case ModelKind::SR:
      est = initial_sr(traj);
      break;
  }
  if (!est || !est->feasible()) return fallback_estimate(kind, traj);
  return *est;
}

ModelSpec initial_estimate(ModelKind kind, std::span<const KilledTrajectory> trajs) {
  if (trajs.empty()) throw DomainError("initial_estimate: no trajectories");
  if (trajs.size() == 1) return initial_estimate(kind, trajs.front());
  const std::size_t p = parameter_count(kind);
  std::vector<std::vector<double>> cols(p);
  for (const auto& t : trajs) {
    const auto th = initial_estimate(kind, t).theta();
    for (std::size_t i = 0; i < p; ++i) cols[i].push_back(th[i]);
  }
  std::vector<double> theta(p);
  for (std::size_t i = 0; i < p; ++i) theta[i] = median(cols[i]);
  ModelSpec m = ModelSpec::from_theta(kind, theta);
  if (kind == ModelKind::SR) m.mu = std::max(m.mu, 0.6 * m.sigma * m.sigma);
  return m;
}

FitResult fit_from(const ModelSpec& start, std::span<const KilledTrajectory> trajs,
                   Objective objective, const CrossingMethod& method, const FitOptions& opts) {
  if (trajs.empty()) throw DomainError("fit: no trajectories");
  method.validate(start.kind);
  const ModelKind kind = start.kind;

  auto negloglik = [&](std::span<const double> u) {
    const ModelSpec m = from_search(kind, u);
    if (!m.feasible()) return nm::kInf;
    const LogLik l = loglik(m, trajs, objective, method);
    return l.finite() ? -l.value : nm::kInf;
  };

  FitResult res;
  res.method = objective;
  auto run = nm::nelder_mead(negloglik, initial_simplex(start, opts), opts.nelder_mead);
  res.n_evals = run.n_evals;
  if (!run.converged && opts.restart_on_max_evals && run.n_evals >= opts.nelder_mead.max_evals &&
      std::isfinite(run.f)) {
    const ModelSpec incumbent = from_search(kind, run.x);
    auto again = nm::nelder_mead(negloglik, initial_simplex(incumbent, opts), opts.nelder_mead);
    res.n_restarts = 1;
    res.n_evals += again.n_evals;
    if (again.f <= run.f) {
      run = std::move(again);
    } else {
      run.converged = again.converged;
    }
  }

  res.theta_hat = from_search(kind, run.x);
  res.loglik = -run.f;
  res.converged = run.converged && std::isfinite(run.f);
  if (kind != ModelKind::WD) {
    const auto& t = res.theta_hat;
    res.boundary_flag = t.beta < 1e-6 ||
                        (kind == ModelKind::SR && 2.0 * t.mu - t.sigma * t.sigma < 1e-6 * t.sigma * t.sigma);
  }
  if (std::isfinite(run.f) && objective == Objective::Killed) {
    loglik(res.theta_hat, trajs, objective, method, &res.diagnostics);
  }
  return res;
}

FitResult fit(ModelKind kind, std::span<const KilledTrajectory> trajs, Objective objective,
              const CrossingMethod& method, const FitOptions& opts) {
  if (trajs.empty()) throw DomainError("fit: no trajectories");
  return fit_from(initial_estimate(kind, trajs), trajs, objective, method, opts);
}

}  // namespace killedfit
