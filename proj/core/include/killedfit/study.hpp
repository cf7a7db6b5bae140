#pragma once

// Monte Carlo studies: simulate n_total trajectories once, split them into
// consecutive groups of m, fit each group with the pooled likelihood and
// summarize the estimates per (objective, m).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "killedfit/bootstrap.hpp"
#include "killedfit/estimate.hpp"
#include "killedfit/simulate.hpp"

namespace killedfit {

/// Named parameter settings used by the reference simulation tables.
struct StudyCase {
  std::string name;
  ModelSpec model;
  ThresholdConfig cfg;
};

/// WD cases 1-4, OU cases 1-4 and SR cases 1-3; nullopt otherwise.
std::optional<StudyCase> preset_case(ModelKind kind, int index);
std::vector<StudyCase> preset_cases();

struct StudyPlan {
  ModelSpec model;
  ThresholdConfig cfg;
  int substep_divisor = 10;
  Stepper stepper = Stepper::ExactTransition;
  std::uint64_t seed = 1;
  std::size_t n_total = 2000;
  std::vector<std::size_t> group_sizes{1};
  std::vector<Objective> objectives{Objective::Killed};
  /// Defaults to CrossingMethod::default_for(model.kind) when unset.
  std::optional<CrossingMethod> method;
  FitOptions fit{};
  int threads = 1;

  CrossingMethod crossing_method() const;
  void validate() const;
};

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double rel_bias = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct StudySummary {
  Objective objective = Objective::Killed;
  std::size_t group_size = 1;
  std::size_t n_replicates = 0;
  std::size_t n_nonconverged = 0;
  std::size_t n_boundary = 0;
  double avg_N = 0.0;
  std::vector<ParameterSummary> params;
};

/// Raw per-group estimates for one (objective, m) cell.
struct GroupEstimates {
  Objective objective = Objective::Killed;
  std::size_t group_size = 1;
  std::vector<std::vector<double>> theta;
  std::vector<char> converged;
  /// Column `index` of theta.
  std::vector<double> column(std::size_t index) const;
};

struct StudyResult {
  std::vector<KilledTrajectory> trajectories;
  std::vector<GroupEstimates> raw;
  std::vector<StudySummary> summaries;
};

/// Summaries include non-converged groups; their count is reported.
StudyResult run_study(const StudyPlan& plan);

/// Per-parameter mean, relative bias, sd and type-7 quantiles of `estimates`
/// (one row per replicate).
std::vector<ParameterSummary> summarize(std::span<const std::vector<double>> estimates,
                                        const ModelSpec& truth);

struct Interval {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// (avg - truth)/truth +- t_{(1+conf)/2, k-1} sd / (truth sqrt(k)).
/// Throws DomainError for fewer than two estimates or truth == 0.
Interval mean_bias_ci(std::span<const double> estimates, double truth, double confidence = 0.95);

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Gaussian kernel density on an even grid spanning the data +- 3h, with
/// Silverman's bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}.
Table kernel_density(std::span<const double> values, std::size_t n_points = 256);

/// Sorted sample against standard normal quantiles at (i - 0.5)/n.
Table normal_qq(std::span<const double> values);

/// Pearson correlation of the normal Q-Q points.
double qq_correlation(std::span<const double> values);

/// Mean relative bias and its confidence interval against m, for one
/// parameter and objective.
Table ci_vs_m(const StudyResult& result, Objective objective, std::size_t param_index,
              double truth, double confidence = 0.95);

// ---------------------------------------------------------------------------
// Bootstrap studies
// ---------------------------------------------------------------------------

struct BootstrapStudyPlan {
  ModelSpec model;
  ThresholdConfig cfg;
  int substep_divisor = 10;
  Stepper stepper = Stepper::ExactTransition;
  std::uint64_t seed = 1;
  std::size_t n_outer = 300;
  std::size_t n_boot = 300;
  std::optional<CrossingMethod> method;
  FitOptions fit{};
  int threads = 1;
};

struct BootstrapStudyResult {
  /// Replicates with a converged outer fit and a valid bootstrap report.
  std::vector<std::vector<double>> theta_hat;
  std::vector<std::vector<double>> theta_bc;
  std::size_t n_outer = 0;
  std::size_t n_invalid = 0;
  std::vector<ParameterSummary> raw_summary;
  std::vector<ParameterSummary> bc_summary;
  double rel_efficiency = 0.0;
};

/// Outer trajectory i uses keys (seed, {i}) exactly as in run_study; its
/// bootstrap samples use a disjoint key prefix. Outer replicates run in
/// parallel, each bootstrap serially.
BootstrapStudyResult run_bootstrap_study(const BootstrapStudyPlan& plan);

}  // namespace killedfit
