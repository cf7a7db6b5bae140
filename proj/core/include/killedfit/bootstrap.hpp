#pragma once

// Parametric bootstrap bias correction: theta_bc = 2 theta_hat - avg(theta_B),
// where theta_B are refits of data simulated at theta_hat.

#include <cstdint>
#include <span>
#include <vector>

#include "killedfit/estimate.hpp"
#include "killedfit/simulate.hpp"

namespace killedfit {

struct BootstrapOptions {
  std::size_t n_boot = 1000;
  int substep_divisor = 10;
  Stepper stepper = Stepper::ExactTransition;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Report is invalid when more than this fraction of refits fail.
  double max_failed_fraction = 0.05;
};

struct BootstrapReport {
  ModelSpec theta_hat;
  std::vector<double> avg_boot;
  std::vector<double> bias_hat;
  std::vector<double> theta_bc;
  std::size_t n_boot = 0;
  std::size_t n_failed = 0;
  bool valid = false;
};

/// Bias-corrects `fit`, the pooled estimate for `group`. Each bootstrap
/// sample re-simulates one trajectory per member of `group` with that
/// member's x0, b and delta, and is refitted with the same objective, method
/// and optimizer options. Sample k uses keys (key_prefix..., k, member).
/// Throws DomainError if the fit did not converge or theta_hat cannot be
/// simulated.
BootstrapReport bias_correct(std::span<const KilledTrajectory> group, const FitResult& fit,
                             const CrossingMethod& method, const FitOptions& fit_opts,
                             const BootstrapOptions& opts,
                             std::span<const std::uint64_t> key_prefix = {});

/// det(MSE_bc) / det(MSE_raw) with MSE = (1/K) sum e e^T about the truth.
/// Rows are error vectors theta - theta_0. Throws DomainError on empty or
/// mismatched input and NumericalError if a determinant is not positive.
double relative_efficiency(std::span<const std::vector<double>> errors_bc,
                           std::span<const std::vector<double>> errors_raw);

}  // namespace killedfit
