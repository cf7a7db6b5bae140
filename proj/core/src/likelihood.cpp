#include "killedfit/likelihood.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "killedfit/errors.hpp"
#include "killedfit/numerics.hpp"

namespace killedfit {

namespace nm = numerics;

namespace {

// Factors below 1e-300 count as evaluation failures.
const double kLogFloor = std::log(1e-300);

bool state_ok(const ModelSpec& model, double x) {
  return model.kind != ModelKind::SR || x > 0.0;
}

}  // namespace

void KilledTrajectory::validate(ModelKind kind) const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("trajectory: delta must be positive");
  if (!(x0 < b)) throw DomainError("trajectory: initial state must lie below the threshold");
  if (kind == ModelKind::SR && !(x0 > 0.0)) throw DomainError("trajectory: SR initial state must be positive");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i] < b)) {
      throw DomainError("trajectory: observation " + std::to_string(i + 1) +
                        " is not below the threshold");
    }
    if (kind == ModelKind::SR && !(obs[i] > 0.0)) {
      throw DomainError("trajectory: SR observation " + std::to_string(i + 1) +
                        " is not positive");
    }
  }
}

LogLik LogLik::failed() { return {-nm::kInf, false}; }

bool LogLik::finite() const { return eval_ok && std::isfinite(value); }

double log_fb_density(const ModelSpec& model, double y, double x, double b, double delta,
                      BridgeMethod method, CrossingDiagnostics* diag) {
  if (!(y < b) || !(x < b)) return -nm::kInf;
  if (!state_ok(model, y) || !state_ok(model, x)) return -nm::kInf;
  const double lf = free_log_density(model, y, delta, x);
  if (std::isnan(lf)) return nm::kNaN;
  const double p = bridge_crossing_prob(model, x, y, b, delta, method, diag);
  return lf + std::log1p(-p);
}

double fb_density(const ModelSpec& model, double y, double x, double b, double delta,
                  BridgeMethod method, CrossingDiagnostics* diag) {
  const double lp = log_fb_density(model, y, x, b, delta, method, diag);
  return std::isnan(lp) ? nm::kNaN : std::exp(lp);
}

LogLik loglik_killed(const ModelSpec& model, const KilledTrajectory& traj,
                     const CrossingMethod& method, CrossingDiagnostics* diag) {
  if (!model.feasible()) return LogLik::failed();
  method.validate(model.kind);
  if (!(traj.x0 < traj.b) || !state_ok(model, traj.x0)) return LogLik::failed();

  const FreeTransition transition(model, traj.delta);
  double sum = 0.0;
  double prev = traj.x0;
  for (const double y : traj.obs) {
    if (!(y < traj.b) || !state_ok(model, y)) return LogLik::failed();
    const double lf = transition.log_density(y, prev);
    if (std::isnan(lf)) return LogLik::failed();
    const double p = bridge_crossing_prob(model, prev, y, traj.b, traj.delta, method.bridge, diag);
    const double term = lf + std::log1p(-p);
    if (!(term >= kLogFloor)) return LogLik::failed();
    sum += term;
    prev = y;
  }
  if (traj.crossed) {
    const double g = g_prob(model, prev, traj.b, traj.delta, method, diag);
    if (std::isnan(g) || !(g >= 1e-300)) return LogLik::failed();
    sum += std::log(g);
  }
  return {sum, true};
}

LogLik loglik_killed_chain(const ModelSpec& model, const KilledTrajectory& traj,
                           const CrossingMethod& method) {
  if (!model.feasible()) return LogLik::failed();
  // States on E_b plus the coffin state (nullopt). The observed chain is
  // x0, x1, ..., x_{N-1}, C, C, ...; every step after the first C has
  // transition density 1 and contributes nothing, so one C suffices.
  std::vector<std::optional<double>> chain;
  chain.reserve(traj.obs.size() + 2);
  chain.emplace_back(traj.x0);
  for (double y : traj.obs) chain.emplace_back(y);
  if (traj.crossed) chain.emplace_back(std::nullopt);

  auto killed_density = [&](const std::optional<double>& from,
                            const std::optional<double>& to) -> double {
    if (!from) return to ? 0.0 : 1.0;
    if (!to) return g_prob(model, *from, traj.b, traj.delta, method);
    return fb_density(model, *to, *from, traj.b, traj.delta, method.bridge);
  };

  double sum = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const double f = killed_density(chain[i - 1], chain[i]);
    if (std::isnan(f) || !(f >= 1e-300)) return LogLik::failed();
    sum += std::log(f);
  }
  return {sum, true};
}

LogLik loglik_naive(const ModelSpec& model, const KilledTrajectory& traj) {
  if (!model.feasible()) return LogLik::failed();
  if (!state_ok(model, traj.x0)) return LogLik::failed();
  const FreeTransition transition(model, traj.delta);
  double sum = 0.0;
  double prev = traj.x0;
  for (const double y : traj.obs) {
    const double lf = transition.log_density(y, prev);
    if (std::isnan(lf) || !(lf >= kLogFloor)) return LogLik::failed();
    sum += lf;
    prev = y;
  }
  return {sum, true};
}

LogLik loglik_pooled(const ModelSpec& model, std::span<const KilledTrajectory> trajs,
                     const CrossingMethod& method, CrossingDiagnostics* diag) {
  double sum = 0.0;
  for (const auto& t : trajs) {
    const LogLik l = loglik_killed(model, t, method, diag);
    if (!l.eval_ok) return LogLik::failed();
    sum += l.value;
  }
  return {sum, true};
}

LogLik loglik(const ModelSpec& model, std::span<const KilledTrajectory> trajs,
              Objective objective, const CrossingMethod& method, CrossingDiagnostics* diag) {
  if (objective == Objective::Killed) return loglik_pooled(model, trajs, method, diag);
  double sum = 0.0;
  for (const auto& t : trajs) {
    const LogLik l = loglik_naive(model, t);
    if (!l.eval_ok) return LogLik::failed();
    sum += l.value;
  }
  return {sum, true};
}

std::vector<double> score_numeric(const ModelSpec& model,
                                  std::span<const KilledTrajectory> trajs,
                                  const CrossingMethod& method, Objective objective) {
  const std::vector<double> theta = model.theta();
  std::vector<double> score(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
    std::vector<double> up = theta;
    std::vector<double> down = theta;
    up[i] += h;
    down[i] -= h;
    const LogLik lu = loglik(ModelSpec::from_theta(model.kind, up), trajs, objective, method);
    const LogLik ld = loglik(ModelSpec::from_theta(model.kind, down), trajs, objective, method);
    if (!lu.finite() || !ld.finite()) {
      throw NumericalError("score_numeric: log-likelihood evaluation failed near theta");
    }
    score[i] = (lu.value - ld.value) / (2.0 * h);
  }
  return score;
}

std::vector<std::vector<double>> sample_information(std::span<const std::vector<double>> scores) {
  if (scores.empty()) return {};
  const std::size_t p = scores.front().size();
  std::vector<std::vector<double>> info(p, std::vector<double>(p, 0.0));
  for (const auto& s : scores) {
    if (s.size() != p) throw DomainError("sample_information: score vectors differ in length");
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) info[i][j] += s[i] * s[j];
  }
  for (auto& row : info)
    for (auto& v : row) v /= static_cast<double>(scores.size());
  return info;
}

}  // namespace killedfit
