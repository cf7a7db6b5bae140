#pragma once

// Special functions, quadrature, simplex minimization and keyed random
// streams shared by every other part of the library.
//
// Evaluation failures in the special functions are reported as a quiet NaN
// (the library-wide "missing value" sentinel), never by throwing: the
// likelihood and optimizer layers rely on being able to keep going.

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace killedfit::numerics {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Error function and normal distribution
// ---------------------------------------------------------------------------

double erf(double x);
double erfc(double x);

/// exp(x^2) * erfc(x), stable for large positive x.
double erfcx(double x);

double normal_pdf(double x);
double normal_log_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);
double normal_quantile(double p);

/// Quantile of Student's t distribution with `dof` degrees of freedom.
double student_t_quantile(double p, double dof);

// ---------------------------------------------------------------------------
// Non-central chi-square
// ---------------------------------------------------------------------------
//
// Poisson mixture of central chi-squares evaluated in log space, starting at
// the dominant mixture term and summing outwards until the remaining weight
// falls below 1e-15 of the accumulated sum. Returns NaN when the series does
// not settle or an intermediate term is not finite.

double ncx2_log_pdf(double x, double dof, double noncentrality);
double ncx2_pdf(double x, double dof, double noncentrality);
double ncx2_cdf(double x, double dof, double noncentrality);
/// Upper tail P(X > x), summed directly from central upper tails.
double ncx2_sf(double x, double dof, double noncentrality);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 48;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  long n_evals = 0;
};

/// Adaptive Simpson rule on [a, b]. The effective absolute tolerance is
/// max(abs_tol, rel_tol * |coarse estimate|) so that integrals with a tiny
/// total mass are resolved relative to their own size.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureSpec& spec = {});

/// Globally adaptive 15-point Gauss-Kronrod on [a, b]: the panel with the
/// largest error estimate is bisected until the summed estimate is below
/// max(abs_tol, rel_tol * |integral|). max_depth caps the bisection level of
/// any one panel.
QuadratureResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a,
                                        double b, const QuadratureSpec& spec = {1e-300, 1e-10, 15});

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct NelderMeadOptions {
  int max_evals = 2000;
  /// Stop once f_max - f_min <= rel_tol * (|f_min| + rel_tol).
  double rel_tol = 1e-8;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = kInf;
  int n_evals = 0;
  bool converged = false;
};

/// Minimizes `f` starting from an explicit simplex (dim + 1 vertices). A
/// vertex whose objective is +inf or NaN is treated as +inf, so infeasible
/// regions are only ever left by reflection, contraction or shrinking.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& opts = {});

/// Convenience overload: axis-aligned simplex around x0 with the given steps.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> steps,
                             const NelderMeadOptions& opts = {});

// ---------------------------------------------------------------------------
// Keyed random streams
// ---------------------------------------------------------------------------

/// Deterministic random stream identified by a master seed and a list of
/// integer keys (trajectory index, replicate index, ...). Distinct key lists
/// give logically independent streams. Satisfies UniformRandomBitGenerator.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  KeyedStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);
  KeyedStream(std::uint64_t seed, std::span<const std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, scale = 1).
  double gamma(double shape);
  long poisson(double mean);

 private:
  void seed_from(std::uint64_t seed, std::span<const std::uint64_t> keys);
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

/// (1 - exp(-rate * t)) / rate, continuous at rate = 0.
double one_minus_exp_over_rate(double rate, double t);

/// Linear interpolation of order statistics (type 7). `sorted` must be sorted.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> v);

}  // namespace killedfit::numerics
