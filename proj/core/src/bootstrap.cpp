#include "killedfit/bootstrap.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "killedfit/errors.hpp"
#include "killedfit/parallel.hpp"

namespace killedfit {

namespace nm = numerics;

BootstrapReport bias_correct(std::span<const KilledTrajectory> group, const FitResult& fit,
                             const CrossingMethod& method, const FitOptions& fit_opts,
                             const BootstrapOptions& opts,
                             std::span<const std::uint64_t> key_prefix) {
  if (group.empty()) throw DomainError("bias_correct: empty trajectory group");
  if (!fit.converged) throw DomainError("bias_correct: the original fit did not converge");
  if (opts.n_boot == 0) throw DomainError("bias_correct: n_boot must be positive");
  const ModelSpec theta_hat = fit.theta_hat;
  theta_hat.validate();
  const ModelKind kind = theta_hat.kind;

  std::vector<std::optional<std::vector<double>>> boot(opts.n_boot);
  parallel_for(opts.n_boot, opts.threads, [&](std::size_t k) {
    std::vector<KilledTrajectory> sample;
    sample.reserve(group.size());
    try {
      for (std::size_t j = 0; j < group.size(); ++j) {
        SimPlan plan;
        plan.model = theta_hat;
        plan.cfg = {group[j].b, group[j].x0, group[j].delta};
        plan.substep_divisor = opts.substep_divisor;
        plan.stepper = opts.stepper;
        std::vector<std::uint64_t> keys(key_prefix.begin(), key_prefix.end());
        keys.push_back(k);
        keys.push_back(j);
        nm::KeyedStream rng(opts.seed, keys);
        sample.push_back(simulate_trajectory(plan, rng));
      }
      const FitResult r = fit_from(theta_hat, sample, fit.method, method, fit_opts);
      if (r.converged) boot[k] = r.theta_hat.theta();
    } catch (const NumericalError&) {
      // counted as a failed replicate below
    }
  });

  BootstrapReport rep;
  rep.theta_hat = theta_hat;
  rep.n_boot = opts.n_boot;
  const std::size_t p = parameter_count(kind);
  rep.avg_boot.assign(p, 0.0);
  std::size_t n_ok = 0;
  for (const auto& b : boot) {
    if (!b) {
      ++rep.n_failed;
      continue;
    }
    ++n_ok;
    for (std::size_t i = 0; i < p; ++i) rep.avg_boot[i] += (*b)[i];
  }
  const std::vector<double> th = theta_hat.theta();
  rep.bias_hat.resize(p);
  rep.theta_bc.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    rep.avg_boot[i] = n_ok ? rep.avg_boot[i] / static_cast<double>(n_ok) : nm::kNaN;
    rep.bias_hat[i] = rep.avg_boot[i] - th[i];
    rep.theta_bc[i] = 2.0 * th[i] - rep.avg_boot[i];
  }
  rep.valid = n_ok > 0 && static_cast<double>(rep.n_failed) <=
                              opts.max_failed_fraction * static_cast<double>(opts.n_boot);
  return rep;
}

namespace {

double mse_determinant(std::span<const std::vector<double>> errors, std::size_t p) {
  Eigen::MatrixXd mse = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                              static_cast<Eigen::Index>(p));
  for (const auto& e : errors) {
    if (e.size() != p) throw DomainError("relative_efficiency: error rows differ in length");
    const Eigen::Map<const Eigen::VectorXd> v(e.data(), static_cast<Eigen::Index>(p));
    mse.noalias() += v * v.transpose();
  }
  mse /= static_cast<double>(errors.size());
  return mse.determinant();
}

}  // namespace

double relative_efficiency(std::span<const std::vector<double>> errors_bc,
                           std::span<const std::vector<double>> errors_raw) {
  if (errors_bc.empty() || errors_raw.empty()) {
    throw DomainError("relative_efficiency: empty error set");
  }
  const std::size_t p = errors_raw.front().size();
  if (p == 0) throw DomainError("relative_efficiency: zero-length error rows");
  const double det_bc = mse_determinant(errors_bc, p);
  const double det_raw = mse_determinant(errors_raw, p);
  if (!(det_bc > 0.0) || !(det_raw > 0.0)) {
    throw NumericalError("relative_efficiency: mean square error matrix is singular");
  }
  return det_bc / det_raw;
}

}  // namespace killedfit
