#include <gtest/gtest.h>

#include <cmath>

#include "killedfit/errors.hpp"
#include "killedfit/estimate.hpp"
#include "killedfit/simulate.hpp"

using namespace killedfit;

namespace {

std::vector<KilledTrajectory> simulated(const ModelSpec& m, const ThresholdConfig& cfg, std::size_t n,
                                        std::uint64_t seed) {
  SimPlan plan{m, cfg};
  plan.n_traj = n;
  plan.seed = seed;
  return simulate_killed(plan, 4);
}

FitOptions tight() {
  FitOptions o;
  o.nelder_mead.rel_tol = 1e-12;
  o.nelder_mead.max_evals = 5000;
  return o;
}

}  // namespace

TEST(InitialEstimate, WdIsTheIncrementMoments) {
  const KilledTrajectory t{0.0, 0.5, 10.0, {0.4, 0.2, 1.0, 1.6}, true};
  const auto m = initial_estimate(ModelKind::WD, t);
  EXPECT_DOUBLE_EQ(m.mu, 1.6 / 2.0);
  // increments 0.4, -0.2, 0.8, 0.6 minus mu*delta = 0.4
  const double ss = 0.0 + 0.36 + 0.16 + 0.04;
  EXPECT_NEAR(m.sigma, std::sqrt(ss / 2.0), 1e-15);
}

TEST(InitialEstimate, OuFromLagOneAutocorrelation) {
  const KilledTrajectory t{0.0, 0.1, 10.0, {0.5, 1.2, 1.4, 2.5, 2.2, 3.1}, true};
  const auto m = initial_estimate(ModelKind::OU, t);
  const std::vector<double> x{0.0, 0.5, 1.2, 1.4, 2.5, 2.2, 3.1};
  double xbar = 0.0;
  for (double v : x) xbar += v / 7.0;
  double lag = 0.0, var = 0.0, qv = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    var += (x[i] - xbar) * (x[i] - xbar);
    if (i > 0) {
      lag += (x[i] - xbar) * (x[i - 1] - xbar);
      qv += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    }
  }
  const double beta = -std::log(lag / var) / 0.1;
  EXPECT_NEAR(m.beta, beta, 1e-12);
  EXPECT_NEAR(m.mu, beta * xbar, 1e-12);
  EXPECT_NEAR(m.sigma, std::sqrt(qv / 0.6), 1e-12);
}

TEST(InitialEstimate, ShortOrDegeneratePathsFallBack) {
  for (ModelKind kind : {ModelKind::WD, ModelKind::OU, ModelKind::SR}) {
    const double x0 = kind == ModelKind::SR ? 5.0 : 0.0;
    const KilledTrajectory empty{x0, 0.1, 10.0, {}, true};
    const KilledTrajectory flat{x0, 0.1, 10.0, {x0, x0, x0, x0}, true};
    for (const auto& t : {empty, flat}) {
      const auto m = initial_estimate(kind, t);
      EXPECT_TRUE(m.feasible()) << to_string(kind);
      EXPECT_TRUE(std::isfinite(m.mu));
    }
  }
  const std::vector<KilledTrajectory> none;
  EXPECT_THROW(initial_estimate(ModelKind::OU, none), DomainError);
}

TEST(InitialEstimate, SrRecoversTruthOnLongPaths) {
  const auto truth = ModelSpec::sr(10.0, 1.2, 0.7);
  const auto trajs = simulated(truth, {10.0, 5.0, 0.08}, 400, 11);
  const auto m = initial_estimate(ModelKind::SR, trajs);
  EXPECT_TRUE(m.feasible());
  EXPECT_NEAR(m.sigma, 0.7, 0.1);
  EXPECT_NEAR(m.mu / m.beta, truth.mu / truth.beta, 2.0);
}

TEST(Fit, NaiveWdEqualsClosedForm) {
  const auto trajs = simulated(ModelSpec::wd(0.3, 0.5), {10.0, 0.0, 1.0}, 5, 3);
  double rise = 0.0, n = 0.0;
  for (const auto& t : trajs) {
    rise += (t.obs.empty() ? t.x0 : t.obs.back()) - t.x0;
    n += static_cast<double>(t.obs.size());
  }
  const double mu = rise / n;
  double ss = 0.0;
  for (const auto& t : trajs) {
    double prev = t.x0;
    for (double y : t.obs) {
      ss += (y - prev - mu) * (y - prev - mu);
      prev = y;
    }
  }
  const auto r = fit(ModelKind::WD, trajs, Objective::Naive, CrossingMethod::default_for(ModelKind::WD), tight());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.theta_hat.mu, mu, 1e-5);
  EXPECT_NEAR(r.theta_hat.sigma, std::sqrt(ss / n), 1e-5);
}

TEST(Fit, NaiveOuEqualsAutoregression) {
  // The conditional Gaussian likelihood is maximized by least squares on
  // x_i = a + phi x_{i-1} + e_i.
  const auto trajs = simulated(ModelSpec::ou(0.43, 0.05, 1.2), {10.0, 0.0, 0.1}, 20, 5);
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& t : trajs) {
    double prev = t.x0;
    for (double y : t.obs) {
      n += 1;
      sx += prev;
      sy += y;
      sxx += prev * prev;
      sxy += prev * y;
      prev = y;
    }
  }
  const double phi = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - phi * sx) / n;
  double rss = 0.0;
  for (const auto& t : trajs) {
    double prev = t.x0;
    for (double y : t.obs) {
      rss += (y - a - phi * prev) * (y - a - phi * prev);
      prev = y;
    }
  }
  ASSERT_GT(phi, 0.0);
  ASSERT_LT(phi, 1.0);
  const double beta = -std::log(phi) / 0.1;
  const double mu = beta * a / (1.0 - phi);
  const double sigma = std::sqrt(rss / n * 2.0 * beta / (1.0 - phi * phi));
  const auto r = fit(ModelKind::OU, trajs, Objective::Naive, CrossingMethod::default_for(ModelKind::OU), tight());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.theta_hat.beta / beta, 1.0, 1e-3);
  EXPECT_NEAR(r.theta_hat.mu / mu, 1.0, 1e-3);
  EXPECT_NEAR(r.theta_hat.sigma / sigma, 1.0, 1e-4);
}

TEST(Fit, KilledScoreVanishesAtOptimum) {
  const ModelSpec truths[] = {ModelSpec::wd(0.3, 0.5), ModelSpec::ou(0.43, 0.05, 1.2),
                              ModelSpec::sr(10.0, 1.2, 0.7)};
  const ThresholdConfig cfgs[] = {{10.0, 0.0, 1.0}, {10.0, 0.0, 0.1}, {10.0, 5.0, 0.08}};
  for (int k = 0; k < 3; ++k) {
    const auto method = CrossingMethod::default_for(truths[k].kind);
    const auto trajs = simulated(truths[k], cfgs[k], 30, 17);
    const auto r = fit(truths[k].kind, trajs, Objective::Killed, method, tight());
    ASSERT_TRUE(r.converged) << to_string(truths[k].kind);
    ASSERT_FALSE(r.boundary_flag);
    const auto s = score_numeric(r.theta_hat, trajs, method);
    const auto th = r.theta_hat.theta();
    for (std::size_t i = 0; i < s.size(); ++i) {
      // Scale-free: the log-likelihood changes by less than 1e-3 over a 1%
      // move of each coordinate.
      EXPECT_LT(std::abs(s[i] * th[i]) * 0.01, 1e-3) << to_string(truths[k].kind) << " " << i;
    }
    EXPECT_NEAR(r.loglik, loglik_pooled(r.theta_hat, trajs, method).value, 1e-9 * std::abs(r.loglik));
  }
}

TEST(Fit, KilledRecoversWdTruth) {
  const auto trajs = simulated(ModelSpec::wd(0.3, 0.5), {10.0, 0.0, 1.0}, 400, 23);
  const auto r = fit(ModelKind::WD, trajs, Objective::Killed, CrossingMethod::default_for(ModelKind::WD));
  ASSERT_TRUE(r.converged);
  // About 13600 increments; standard errors are near 0.005 for both.
  EXPECT_NEAR(r.theta_hat.mu, 0.3, 0.02);
  EXPECT_NEAR(r.theta_hat.sigma, 0.5, 0.02);
}

TEST(Fit, DeterministicAndFeasible) {
  const auto trajs = simulated(ModelSpec::sr(2.0, 0.05, 0.5), {20.0, 10.0, 0.08}, 3, 29);
  const auto method = CrossingMethod::default_for(ModelKind::SR);
  const auto a = fit(ModelKind::SR, trajs, Objective::Killed, method);
  const auto b = fit(ModelKind::SR, trajs, Objective::Killed, method);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
  EXPECT_EQ(a.loglik, b.loglik);
  EXPECT_EQ(a.n_evals, b.n_evals);
  EXPECT_TRUE(a.theta_hat.feasible());
  EXPECT_GE(2.0 * a.theta_hat.mu, a.theta_hat.sigma * a.theta_hat.sigma);
}

TEST(Fit, RejectsBadInput) {
  const std::vector<KilledTrajectory> none;
  EXPECT_THROW(fit(ModelKind::WD, none, Objective::Killed, CrossingMethod::default_for(ModelKind::WD)),
               DomainError);
  CrossingMethod wd_only = CrossingMethod::default_for(ModelKind::WD);
  const std::vector<KilledTrajectory> one{{0.0, 0.1, 10.0, {0.2, 0.4, 0.3}, true}};
  EXPECT_THROW(fit(ModelKind::OU, one, Objective::Killed, wd_only), DomainError);
}

TEST(Fit, RestartIsReported) {
  const auto trajs = simulated(ModelSpec::ou(0.43, 0.05, 1.2), {10.0, 0.0, 0.1}, 2, 31);
  FitOptions o;
  o.nelder_mead.max_evals = 20;
  const auto r = fit(ModelKind::OU, trajs, Objective::Killed, CrossingMethod::default_for(ModelKind::OU), o);
  EXPECT_EQ(r.n_restarts, 1);
  EXPECT_LE(r.n_evals, 2 * (20 + 3));  // an iteration in progress may finish
  o.restart_on_max_evals = false;
  const auto s = fit(ModelKind::OU, trajs, Objective::Killed, CrossingMethod::default_for(ModelKind::OU), o);
  EXPECT_EQ(s.n_restarts, 0);
  EXPECT_FALSE(s.converged);
}
