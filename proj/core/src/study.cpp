#include "killedfit/study.hpp"

#include <algorithm>
#include <cmath>

#include "killedfit/errors.hpp"
#include "killedfit/parallel.hpp"

namespace killedfit {

namespace nm = numerics;

namespace {

// Distinguishes bootstrap streams from the outer trajectory streams.
constexpr std::uint64_t kBootstrapKey = 0x626f6f7473747270ULL;

}  // namespace

std::optional<StudyCase> preset_case(ModelKind kind, int index) {
  for (auto& c : preset_cases()) {
    if (c.model.kind == kind && c.name == std::string(to_string(kind)) + std::to_string(index)) {
      return c;
    }
  }
  return std::nullopt;
}

std::vector<StudyCase> preset_cases() {
  const ThresholdConfig wd_cfg{10.0, 0.0, 1.0};
  const ThresholdConfig ou_cfg{10.0, 0.0, 0.1};
  return {
      {"WD1", ModelSpec::wd(0.3, 0.5), wd_cfg},
      {"WD2", ModelSpec::wd(0.3, 1.5), wd_cfg},
      {"WD3", ModelSpec::wd(0.1, 0.5), wd_cfg},
      {"WD4", ModelSpec::wd(0.1, 1.5), wd_cfg},
      {"OU1", ModelSpec::ou(0.43, 0.05, 1.2), ou_cfg},
      {"OU2", ModelSpec::ou(1.0, 0.025, 1.0), ou_cfg},
      {"OU3", ModelSpec::ou(2.0, 0.2, 1.7), ou_cfg},
      {"OU4", ModelSpec::ou(8.0, 1.0, 1.0), {10.0, 0.0, 0.49}},
      {"SR1", ModelSpec::sr(10.0, 1.2, 0.7), {10.0, 5.0, 0.08}},
      {"SR2", ModelSpec::sr(6.0, 0.31, 0.5), {20.0, 10.0, 0.12}},
      {"SR3", ModelSpec::sr(2.0, 0.05, 0.5), {20.0, 10.0, 0.08}},
  };
}

CrossingMethod StudyPlan::crossing_method() const {
  return method ? *method : CrossingMethod::default_for(model.kind);
}

void StudyPlan::validate() const {
  model.validate();
  cfg.validate(model.kind);
  crossing_method().validate(model.kind);
  if (group_sizes.empty()) throw DomainError("study: no group sizes");
  if (objectives.empty()) throw DomainError("study: no objectives");
  for (auto m : group_sizes) {
    if (m == 0) throw DomainError("study: group size must be positive");
    if (m > n_total) throw DomainError("study: group size exceeds n_total");
  }
}

std::vector<double> GroupEstimates::column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(theta.size());
  for (const auto& t : theta) out.push_back(t.at(index));
  return out;
}

std::vector<ParameterSummary> summarize(std::span<const std::vector<double>> estimates,
                                        const ModelSpec& truth) {
  const auto names = parameter_names(truth.kind);
  const auto th = truth.theta();
  std::vector<ParameterSummary> out;
  for (std::size_t i = 0; i < th.size(); ++i) {
    std::vector<double> col;
    col.reserve(estimates.size());
    for (const auto& e : estimates) col.push_back(e.at(i));
    ParameterSummary s;
    s.name = names[i];
    s.truth = th[i];
    if (!col.empty()) {
      std::sort(col.begin(), col.end());
      s.mean = nm::mean(col);
      s.rel_bias = th[i] != 0.0 ? (s.mean - th[i]) / th[i] : nm::kNaN;
      s.sd = nm::sample_sd(col);
      s.q025 = nm::quantile_sorted(col, 0.025);
      s.q975 = nm::quantile_sorted(col, 0.975);
    }
    out.push_back(s);
  }
  return out;
}

StudyResult run_study(const StudyPlan& plan) {
  plan.validate();
  const CrossingMethod method = plan.crossing_method();

  SimPlan sim;
  sim.model = plan.model;
  sim.cfg = plan.cfg;
  sim.substep_divisor = plan.substep_divisor;
  sim.stepper = plan.stepper;
  sim.seed = plan.seed;
  sim.n_traj = plan.n_total;

  StudyResult res;
  res.trajectories = simulate_killed(sim, plan.threads);
  const auto& trajs = res.trajectories;

  for (const Objective obj : plan.objectives) {
    for (const std::size_t m : plan.group_sizes) {
      const std::size_t k = plan.n_total / m;
      std::vector<FitResult> fits(k);
      parallel_for(k, plan.threads, [&](std::size_t g) {
        const std::span<const KilledTrajectory> group(trajs.data() + g * m, m);
        fits[g] = fit(plan.model.kind, group, obj, method, plan.fit);
      });

      GroupEstimates raw;
      raw.objective = obj;
      raw.group_size = m;
      StudySummary sum;
      sum.objective = obj;
      sum.group_size = m;
      sum.n_replicates = k;
      for (const auto& f : fits) {
        raw.theta.push_back(f.theta_hat.theta());
        raw.converged.push_back(f.converged ? 1 : 0);
        if (!f.converged) ++sum.n_nonconverged;
        if (f.boundary_flag) ++sum.n_boundary;
      }
      double n_sum = 0.0;
      for (std::size_t i = 0; i < k * m; ++i) n_sum += static_cast<double>(trajs[i].n_steps());
      sum.avg_N = n_sum / static_cast<double>(k * m);
      sum.params = summarize(raw.theta, plan.model);
      res.raw.push_back(std::move(raw));
      res.summaries.push_back(std::move(sum));
    }
  }
  return res;
}

Interval mean_bias_ci(std::span<const double> estimates, double truth, double confidence) {
  const std::size_t k = estimates.size();
  if (k < 2) throw DomainError("mean_bias_ci: need at least two estimates");
  if (truth == 0.0) throw DomainError("mean_bias_ci: relative bias undefined for truth 0");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw DomainError("mean_bias_ci: confidence must lie in (0, 1)");
  }
  const double avg = nm::mean(estimates);
  const double sd = nm::sample_sd(estimates);
  const double t = nm::student_t_quantile(0.5 * (1.0 + confidence), static_cast<double>(k - 1));
  const double center = (avg - truth) / truth;
  const double half = t * sd / (std::abs(truth) * std::sqrt(static_cast<double>(k)));
  return {center, center - half, center + half};
}

Table kernel_density(std::span<const double> values, std::size_t n_points) {
  Table t{{"x", "density"}, {}};
  if (values.empty() || n_points < 2) return t;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double sd = nm::sample_sd(v);
  const double iqr = nm::quantile_sorted(v, 0.75) - nm::quantile_sorted(v, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) h = std::max(1e-3 * std::abs(v.front()), 1e-3);
  const double lo = v.front() - 3.0 * h;
  const double hi = v.back() + 3.0 * h;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    double d = 0.0;
    for (const double xi : v) d += nm::normal_pdf((x - xi) / h);
    t.rows.push_back({x, d / (n * h)});
  }
  return t;
}

Table normal_qq(std::span<const double> values) {
  Table t{{"theoretical", "sample"}, {}};
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    t.rows.push_back({nm::normal_quantile((static_cast<double>(i) + 0.5) / n), v[i]});
  }
  return t;
}

double qq_correlation(std::span<const double> values) {
  const Table qq = normal_qq(values);
  if (qq.rows.size() < 2) return nm::kNaN;
  double mx = 0.0, my = 0.0;
  for (const auto& r : qq.rows) {
    mx += r[0];
    my += r[1];
  }
  const double n = static_cast<double>(qq.rows.size());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& r : qq.rows) {
    sxy += (r[0] - mx) * (r[1] - my);
    sxx += (r[0] - mx) * (r[0] - mx);
    syy += (r[1] - my) * (r[1] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return nm::kNaN;
  return sxy / std::sqrt(sxx * syy);
}

Table ci_vs_m(const StudyResult& result, Objective objective, std::size_t param_index,
              double truth, double confidence) {
  Table t{{"m", "rel_bias", "lower", "upper"}, {}};
  for (const auto& raw : result.raw) {
    if (raw.objective != objective || raw.theta.size() < 2) continue;
    const auto col = raw.column(param_index);
    const Interval ci = mean_bias_ci(col, truth, confidence);
    t.rows.push_back({static_cast<double>(raw.group_size), ci.center, ci.lower, ci.upper});
  }
  return t;
}

BootstrapStudyResult run_bootstrap_study(const BootstrapStudyPlan& plan) {
  plan.model.validate();
  plan.cfg.validate(plan.model.kind);
  if (plan.n_outer == 0) throw DomainError("bootstrap study: n_outer must be positive");
  const CrossingMethod method = plan.method ? *plan.method : CrossingMethod::default_for(plan.model.kind);
  method.validate(plan.model.kind);

  SimPlan sim;
  sim.model = plan.model;
  sim.cfg = plan.cfg;
  sim.substep_divisor = plan.substep_divisor;
  sim.stepper = plan.stepper;
  sim.seed = plan.seed;
  sim.n_traj = plan.n_outer;
  const auto trajs = simulate_killed(sim, plan.threads);

  BootstrapOptions bopts;
  bopts.n_boot = plan.n_boot;
  bopts.substep_divisor = plan.substep_divisor;
  bopts.stepper = plan.stepper;
  bopts.seed = plan.seed;
  bopts.threads = 1;

  std::vector<std::optional<BootstrapReport>> reports(plan.n_outer);
  parallel_for(plan.n_outer, plan.threads, [&](std::size_t i) {
    const std::span<const KilledTrajectory> one(&trajs[i], 1);
    const FitResult f = fit(plan.model.kind, one, Objective::Killed, method, plan.fit);
    if (!f.converged) return;
    const std::uint64_t prefix[] = {kBootstrapKey, i};
    try {
      reports[i] = bias_correct(one, f, method, plan.fit, bopts, prefix);
    } catch (const DomainError&) {
      // theta_hat outside the simulable region; counted as invalid
    }
  });

  BootstrapStudyResult res;
  res.n_outer = plan.n_outer;
  std::vector<std::vector<double>> err_raw, err_bc;
  const auto truth = plan.model.theta();
  for (const auto& r : reports) {
    if (!r || !r->valid) {
      ++res.n_invalid;
      continue;
    }
    res.theta_hat.push_back(r->theta_hat.theta());
    res.theta_bc.push_back(r->theta_bc);
    std::vector<double> er(truth.size()), eb(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
      er[j] = res.theta_hat.back()[j] - truth[j];
      eb[j] = r->theta_bc[j] - truth[j];
    }
    err_raw.push_back(std::move(er));
    err_bc.push_back(std::move(eb));
  }
  res.raw_summary = summarize(res.theta_hat, plan.model);
  res.bc_summary = summarize(res.theta_bc, plan.model);
  res.rel_efficiency = err_raw.empty() ? nm::kNaN : relative_efficiency(err_bc, err_raw);
  return res;
}

}  // namespace killedfit
