#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "killedfit/numerics.hpp"

namespace nm = killedfit::numerics;

// Reference values computed with 40-digit arbitrary precision arithmetic.
TEST(ErrorFunction, MatchesHighPrecisionReference) {
  EXPECT_EQ(nm::erf(0.0), 0.0);
  EXPECT_EQ(nm::erf(nm::kInf), 1.0);
  EXPECT_NEAR(nm::erf(0.5657), 0.57630114511515577697, 1e-15);
  EXPECT_NEAR(nm::erf(1e-3), 0.0011283787909692364034, 1e-18);
  EXPECT_NEAR(nm::erf(3.0), 0.99997790950300141456, 1e-15);
  EXPECT_NEAR(nm::erf(-1.2), -0.91031397822963536837, 1e-15);
  EXPECT_NEAR(nm::erfc(5.0) / 1.5374597944280348502e-12, 1.0, 1e-13);
  EXPECT_NEAR(nm::erfc(26.0) / 5.6631924088561428465e-296, 1.0, 1e-12);
}

TEST(ErrorFunction, ScaledComplementaryIsStable) {
  EXPECT_NEAR(nm::erfcx(30.0), 0.018795888861416751497, 1e-16);
  EXPECT_NEAR(nm::erfcx(2.0), 0.25539567631050574387, 1e-15);
  EXPECT_NEAR(nm::erfcx(-1.0), 5.0089800807622834663, 1e-13);
  // Continuity across the asymptotic switch.
  EXPECT_NEAR(nm::erfcx(24.999999) / nm::erfcx(25.000001), 1.0, 1e-6);
  EXPECT_TRUE(std::isfinite(nm::erfcx(1e8)));
}

TEST(Normal, TailsAndQuantiles) {
  EXPECT_NEAR(nm::normal_cdf(-10.0) / 7.619853024160526066e-24, 1.0, 1e-12);
  EXPECT_NEAR(nm::normal_sf(8.0) / 6.2209605742717841235e-16, 1.0, 1e-12);
  EXPECT_NEAR(nm::normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(nm::student_t_quantile(0.975, 9.0), 2.2621571628540993, 1e-10);
  EXPECT_NEAR(nm::student_t_quantile(0.975, 332.0), 1.9671350567188735, 1e-10);
  EXPECT_NEAR(nm::normal_log_pdf(1.5), std::log(nm::normal_pdf(1.5)), 1e-14);
}

struct Ncx2Case {
  double x, k, lambda, pdf, cdf;
};

TEST(NoncentralChiSquare, MatchesSeriesReference) {
  const std::vector<Ncx2Case> cases = {
      {3.0, 4.0, 2.5, 0.10935582684207899, 0.211705225655690674},
      {50.0, 10.0, 40.0, 0.0295212234954492015, 0.528710534217771327},
      {200.0, 81.6327, 120.0, 0.0157812542229014447, 0.488696427101981981},
      {0.5, 2.0, 0.1, 0.3750537134376806, 0.21167410899515193},
      {1e-3, 3.0, 1.0, 0.00764923595278685, 5.100170648226697e-06},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.x);
    EXPECT_NEAR(nm::ncx2_pdf(c.x, c.k, c.lambda) / c.pdf, 1.0, 1e-10);
    EXPECT_NEAR(nm::ncx2_cdf(c.x, c.k, c.lambda) / c.cdf, 1.0, 1e-10);
    EXPECT_NEAR(nm::ncx2_sf(c.x, c.k, c.lambda), 1.0 - c.cdf, 1e-12);
    EXPECT_NEAR(nm::ncx2_log_pdf(c.x, c.k, c.lambda), std::log(c.pdf), 1e-10);
  }
}

TEST(NoncentralChiSquare, LargeArgumentMatchesBesselReference) {
  // log of 0.5 e^{-(x+l)/2} (x/l)^{nu/2} I_nu(sqrt(l x)) at 40 digits.
  const std::vector<Ncx2Case> cases = {
      {5300.0, 81.6327, 5100.0, -6.2384888952862789505, 0.0},
      {250.0, 3.0, 230.0, -4.5395492025902386587, 0.0},
      {40.0, 600.0, 900.0, -955.49849711238901735, 0.0},
      {1e6, 2.0, 1.01e6, -20.96021636205331454, 0.0},
      {2.0e4, 1.5, 1.98e4, -6.8138263544187633298, 0.0},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.x);
    EXPECT_NEAR(nm::ncx2_log_pdf(c.x, c.k, c.lambda), c.pdf, 1e-11 * std::max(1.0, std::abs(c.pdf)));
  }
}

TEST(NoncentralChiSquare, ContinuousAcrossEvaluationRoutes) {
  // Sweep the Bessel argument through the switch between the Poisson series
  // and the asymptotic forms.
  for (double k : {1.5, 3.0, 40.0}) {
    double prev = nm::ncx2_log_pdf(150.0 * 1.1, k, 150.0 / 1.1);
    for (double w = 151.0; w < 260.0; w += 1.0) {
      const double v = nm::ncx2_log_pdf(w * 1.1, k, w / 1.1);
      EXPECT_LT(std::abs(v - prev), 0.05) << k << " " << w;
      prev = v;
    }
  }
}

TEST(NoncentralChiSquare, CentralLimitAndDomain) {
  // lambda = 0 reduces to the central chi-square with k = 4: pdf x e^{-x/2} / 4.
  EXPECT_NEAR(nm::ncx2_pdf(3.0, 4.0, 0.0), 3.0 * std::exp(-1.5) / 4.0, 1e-15);
  EXPECT_NEAR(nm::ncx2_cdf(2.0, 2.0, 0.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_EQ(nm::ncx2_pdf(-1.0, 3.0, 1.0), 0.0);
  EXPECT_TRUE(std::isnan(nm::ncx2_pdf(1.0, -3.0, 1.0)));
  EXPECT_TRUE(std::isnan(nm::ncx2_cdf(1.0, 3.0, -1.0)));
}

TEST(NoncentralChiSquare, MeanByQuadrature) {
  const double k = 81.6327, lambda = 120.0;
  nm::QuadratureSpec spec{1e-12, 1e-12, 50};
  const auto q = nm::adaptive_simpson([&](double x) { return x * nm::ncx2_pdf(x, k, lambda); },
                                      0.0, 800.0, spec);
  ASSERT_TRUE(q.converged);
  EXPECT_NEAR(q.value, k + lambda, 1e-8);
}

TEST(NoncentralChiSquare, CdfAgreesWithMonteCarlo) {
  // SR parameters mu=10, beta=1.2, sigma=0.7, x=5 at dt=0.08.
  const double mu = 10.0, beta = 1.2, sigma = 0.7, x = 5.0, dt = 0.08;
  const double k = 4.0 * mu / (sigma * sigma);
  const double c = 4.0 * beta / (sigma * sigma * (1.0 - std::exp(-beta * dt)));
  const double lambda = x * c * std::exp(-beta * dt);
  const double q = k + lambda;  // near the centre of the law
  nm::KeyedStream rng(2024, {1});
  const int n = 1'000'000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    const double z = rng.normal() + std::sqrt(lambda);
    s += z * z;
    s += 2.0 * rng.gamma(0.5 * (k - 1.0));
    if (s <= q) ++hits;
  }
  const double p = static_cast<double>(hits) / n;
  const double se = std::sqrt(p * (1.0 - p) / n);
  EXPECT_NEAR(nm::ncx2_cdf(q, k, lambda), p, 3.0 * se);
}

TEST(Quadrature, PolynomialAndBisection) {
  const auto q = nm::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0);
  EXPECT_TRUE(q.converged);
  EXPECT_NEAR(q.value, 1.0 / 3.0, 1e-10);

  auto f = [](double x) { return std::exp(-x) * std::sin(3.0 * x); };
  const nm::QuadratureSpec spec{1e-10, 1e-12, 48};
  const double whole = nm::adaptive_simpson(f, 0.0, 4.0, spec).value;
  const double split = nm::adaptive_simpson(f, 0.0, 1.3, spec).value +
                       nm::adaptive_simpson(f, 1.3, 4.0, spec).value;
  EXPECT_NEAR(whole, split, 2e-10);
}

TEST(Quadrature, GaussKronrod) {
  auto f = [](double x) { return std::exp(-x) * std::sin(3.0 * x); };
  // int_0^4 e^{-x} sin 3x dx = (3 - e^{-4}(sin 12 + 3 cos 12)) / 10
  const double exact = (3.0 - std::exp(-4.0) * (std::sin(12.0) + 3.0 * std::cos(12.0))) / 10.0;
  const auto q = nm::adaptive_gauss_kronrod(f, 0.0, 4.0);
  EXPECT_TRUE(q.converged);
  EXPECT_NEAR(q.value, exact, 1e-12);
  EXPECT_NEAR(nm::adaptive_gauss_kronrod(f, 4.0, 0.0).value, -exact, 1e-12);
  // Essential singularity at the left end, as in first-passage integrands.
  auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; };
  const auto qg = nm::adaptive_gauss_kronrod(g, 0.0, 1.0);
  EXPECT_TRUE(qg.converged);
  EXPECT_NEAR(qg.value / std::exp(-1.0), 1.0, 1e-10);
  EXPECT_LT(qg.n_evals, 2000);
  const auto bad = nm::adaptive_gauss_kronrod([](double) { return nm::kNaN; }, 0.0, 1.0);
  EXPECT_FALSE(bad.converged);
  EXPECT_TRUE(std::isnan(bad.value));
}

TEST(Quadrature, ReportsNonConvergence) {
  const nm::QuadratureSpec spec{1e-14, 1e-14, 3};
  const auto q = nm::adaptive_simpson([](double x) { return 1.0 / std::sqrt(x + 1e-12); }, 0.0,
                                      1.0, spec);
  EXPECT_FALSE(q.converged);
  const auto nan = nm::adaptive_simpson([](double) { return nm::kNaN; }, 0.0, 1.0);
  EXPECT_FALSE(nan.converged);
}

TEST(NelderMead, QuadraticBowl) {
  auto f = [](std::span<const double> x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] + 1.0) * (x[1] + 1.0);
  };
  const std::vector<double> x0{0.0, 0.0}, steps{0.5, 0.5};
  nm::NelderMeadOptions opts;
  opts.rel_tol = 1e-16;
  const auto r = nm::nelder_mead(f, x0, steps, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
  EXPECT_NEAR(r.x[1], -1.0, 1e-6);
}

TEST(NelderMead, RetreatsFromInfeasibleRegion) {
  // Minimum at the boundary x = 1 of the feasible half-line x >= 1.
  auto f = [](std::span<const double> x) {
    if (x[0] < 1.0) return nm::kInf;
    return (x[0] - 0.5) * (x[0] - 0.5);
  };
  const std::vector<double> x0{3.0}, steps{0.7};
  const auto r = nm::nelder_mead(f, x0, steps);
  EXPECT_GE(r.x[0], 1.0);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_TRUE(std::isfinite(r.f));
}

TEST(KeyedStream, DeterministicAndDistinct) {
  nm::KeyedStream a(7, {1, 2}), b(7, {1, 2}), c(7, {2, 1}), d(8, {1, 2});
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
  }
}

TEST(KeyedStream, StreamsAreUncorrelated) {
  nm::KeyedStream s1(99, {3}), s2(99, {4});
  const int n = 1'000'000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s1.uniform(), y = s2.uniform();
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 0.01);
  EXPECT_NEAR(sx / n, 0.5, 0.002);
}

TEST(KeyedStream, NormalGammaPoissonMoments) {
  nm::KeyedStream rng(5, {0});
  const int n = 200'000;
  double s = 0, s2 = 0, g = 0, p = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    g += rng.gamma(2.5);
    p += static_cast<double>(rng.poisson(3.7));
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(g / n, 2.5, 0.02);
  EXPECT_NEAR(p / n, 3.7, 0.02);
}

TEST(Helpers, QuantilesAndMoments) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(v, 0.025), 1.075);
  EXPECT_DOUBLE_EQ(nm::mean(v), 2.5);
  EXPECT_NEAR(nm::sample_sd(v), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(nm::sample_sd(std::vector<double>{3.0}), 0.0);
  EXPECT_NEAR(nm::one_minus_exp_over_rate(0.0, 2.0), 2.0, 1e-15);
  EXPECT_NEAR(nm::one_minus_exp_over_rate(1e-12, 2.0), 2.0, 1e-10);
  EXPECT_NEAR(nm::one_minus_exp_over_rate(0.5, 2.0), (1.0 - std::exp(-1.0)) / 0.5, 1e-15);
}
