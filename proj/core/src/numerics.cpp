#include "killedfit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace killedfit::numerics {

namespace {

namespace bm = boost::math;
using QuietPolicy = bm::policies::policy<bm::policies::domain_error<bm::policies::errno_on_error>,
                                         bm::policies::pole_error<bm::policies::errno_on_error>,
                                         bm::policies::overflow_error<bm::policies::errno_on_error>,
                                         bm::policies::evaluation_error<bm::policies::errno_on_error>,
                                         bm::policies::promote_double<false>>;

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSeriesTol = 1e-15;
constexpr long kMaxSeriesTerms = 2'000'000;

double central_chi2_log_pdf(double x, double dof) {
  const double half = 0.5 * dof;
  return (half - 1.0) * std::log(x) - 0.5 * x - half * kLn2 - std::lgamma(half);
}


// Coefficients of the Debye polynomials u_k(p) = p^k sum_j c_kj p^{2j}.
constexpr double kDebye1[] = {1.0 / 8, -5.0 / 24};
constexpr double kDebye2[] = {9.0 / 128, -77.0 / 192, 385.0 / 1152};
constexpr double kDebye3[] = {75.0 / 1024, -4563.0 / 5120, 17017.0 / 9216, -85085.0 / 82944};
constexpr double kDebye4[] = {3675.0 / 32768, -96833.0 / 40960, 144001.0 / 16384,
                              -7436429.0 / 663552, 37182145.0 / 7962624};
constexpr double kDebye5[] = {59535.0 / 262144,        -67608983.0 / 9175040,
                              250881631.0 / 5898240,   -108313205.0 / 1179648,
                              5391411025.0 / 63700992, -5391411025.0 / 191102976};
constexpr double kDebye6[] = {2401245.0 / 4194304,          -388895895.0 / 14680064,
                              1441372804469.0 / 6606028800, -33010308331.0 / 47185920,
                              4445922195.0 / 4194304,       -1169936192425.0 / 1528823808,
                              5849680962125.0 / 27518828544};
constexpr double kDebye7[] = {57972915.0 / 33554432,
                              -25388505925.0 / 234881024,
                              1007390378503.0 / 838860800,
                              -1602251736839.0 / 301989888,
                              10559432785187.0 / 905969664,
                              -36927006432745.0 / 2717908992,
                              1774793203908725.0 / 220150628352,
                              -1267709431363375.0 / 660451885056};

template <std::size_t N>
double debye_poly(const double (&c)[N], double p2) {
  double acc = 0.0;
  for (std::size_t j = N; j-- > 0;) acc = acc * p2 + c[j];
  return acc;
}

// Both return log(I_nu(w) exp(-w)).
double log_bessel_i_scaled_hankel(double nu, double w) {
  const double mu4 = 4.0 * nu * nu;
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu4 - odd * odd) / (8.0 * k * w);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return -0.5 * std::log(2.0 * M_PI * w) + std::log(sum);
}

double log_bessel_i_scaled_debye(double nu, double w) {
  const double z = w / nu;
  const double root = std::sqrt(1.0 + z * z);
  const double p = 1.0 / root;
  const double p2 = p * p;
  const double inv = p / nu;
  double sum = 1.0, pk = 1.0;
  pk *= inv;
  sum += pk * debye_poly(kDebye1, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye2, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye3, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye4, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye5, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye6, p2);
  pk *= inv;
  sum += pk * debye_poly(kDebye7, p2);
  // nu * eta - w with eta = root + log(z / (1 + root)), written without the
  // cancellation between nu * root and w.
  const double excess = nu * nu / (nu * root + w) + nu * std::log(z / (1.0 + root));
  return excess - 0.5 * std::log(2.0 * M_PI * nu) - 0.25 * std::log1p(z * z) + std::log(sum);
}

// The omitted Debye term is below 6.1 / R^8 with R = hypot(nu, w), so beyond
// R = 200 the expansion is at round-off level.
constexpr double kDebyeRadius = 200.0;

// Whether the Bessel route applies; otherwise the Poisson series is used.
bool use_bessel_form(double nu, double w) {
  if (nu >= 1.0) return std::hypot(nu, w) > kDebyeRadius;
  return w > kDebyeRadius && nu * nu <= w / 16.0;
}

// log of the non-central chi-square density through the Bessel form
// 0.5 exp(-(x + lambda)/2) (x/lambda)^{nu/2} I_nu(sqrt(lambda x)), nu = k/2 - 1.
double ncx2_log_pdf_bessel(double x, double dof, double noncentrality) {
  const double nu = 0.5 * dof - 1.0;
  const double w = std::sqrt(noncentrality * x);
  const double gap = std::sqrt(x) - std::sqrt(noncentrality);
  const double scaled =
      nu >= 1.0 ? log_bessel_i_scaled_debye(nu, w) : log_bessel_i_scaled_hankel(nu, w);
  return -kLn2 - 0.5 * gap * gap + 0.5 * nu * std::log(x / noncentrality) + scaled;
}

}  // namespace

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic expansion sum (-1)^n (2n-1)!! / (2x^2)^n; the first omitted
  // term is below 3e-15 relative for x >= 25.
  const double inv2 = 1.0 / (x * x);
  double series = 1.0, term = 1.0;
  for (int n = 1; n <= 5; ++n) {
    term *= -(2.0 * n - 1.0) * 0.5 * inv2;
    series += term;
  }
  return series / (x * std::sqrt(M_PI));
}

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }
double normal_pdf(double x) { return std::exp(normal_log_pdf(x)); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    return kNaN;
  }
  return bm::quantile(bm::normal_distribution<double, QuietPolicy>(0.0, 1.0), p);
}

double student_t_quantile(double p, double dof) {
  if (!(dof > 0.0) || !(p > 0.0 && p < 1.0)) return kNaN;
  return bm::quantile(bm::students_t_distribution<double, QuietPolicy>(dof), p);
}

// ---------------------------------------------------------------------------

double ncx2_log_pdf(double x, double dof, double noncentrality) {
  if (!(dof > 0.0) || !(noncentrality >= 0.0) || std::isnan(x)) return kNaN;
  if (!std::isfinite(dof) || !std::isfinite(noncentrality)) return kNaN;
  if (x < 0.0) return -kInf;
  if (x == 0.0) {
    // Only the j = 0 mixture component can be non-zero at the origin.
    if (dof < 2.0) return kInf;
    if (dof == 2.0) return -0.5 * noncentrality - kLn2;
    return -kInf;
  }
  if (!std::isfinite(x)) return -kInf;
  if (noncentrality == 0.0) return central_chi2_log_pdf(x, dof);
  if (use_bessel_form(0.5 * dof - 1.0, std::sqrt(noncentrality * x))) {
    return ncx2_log_pdf_bessel(x, dof, noncentrality);
  }

  const double half_lambda = 0.5 * noncentrality;
  const double half_k = 0.5 * dof;
  const double quarter_prod = 0.25 * noncentrality * x;

  // Dominant term: (j+1)(k/2+j) = lambda*x/4.
  const double bq = half_k + 1.0;
  const double disc = bq * bq - 4.0 * (half_k - quarter_prod);
  double j_peak = disc > 0.0 ? 0.5 * (-bq + std::sqrt(disc)) : 0.0;
  j_peak = std::max(0.0, std::floor(j_peak));
  if (j_peak > 1e12) return kNaN;
  const long j0 = static_cast<long>(j_peak);

  const double log_t0 = -half_lambda + j0 * std::log(half_lambda) - std::lgamma(j0 + 1.0) +
                        central_chi2_log_pdf(x, dof + 2.0 * j0);
  if (!std::isfinite(log_t0)) return kNaN;

  // ratio t_{j+1}/t_j
  auto ratio = [&](long j) { return quarter_prod / ((j + 1.0) * (half_k + j)); };

  double sum = 1.0;
  double term = 1.0;
  long count = 0;
  for (long j = j0;; ++j) {
    const double r = ratio(j);
    term *= r;
    sum += term;
    if (r < 1.0 && term / (1.0 - r) <= kSeriesTol * sum) break;
    if (++count > kMaxSeriesTerms || !std::isfinite(sum)) return kNaN;
  }
  term = 1.0;
  for (long j = j0; j > 0; --j) {
    const double r = 1.0 / ratio(j - 1);
    term *= r;
    sum += term;
    if (r < 1.0 && term / (1.0 - r) <= kSeriesTol * sum) break;
    if (++count > kMaxSeriesTerms || !std::isfinite(sum)) return kNaN;
  }
  return log_t0 + std::log(sum);
}

double ncx2_pdf(double x, double dof, double noncentrality) {
  const double lp = ncx2_log_pdf(x, dof, noncentrality);
  return std::isnan(lp) ? kNaN : std::exp(lp);
}

namespace {

// Sum of Poisson(lambda/2) weights times central tail probabilities, starting
// at the Poisson mode and walking outwards. The tail is monotone in the
// degrees of freedom, so the remainder in each direction is bounded by the
// remaining Poisson mass times either the current tail value (tail shrinking)
// or one (tail growing).
template <typename Tail>
double poisson_mixture(double dof, double noncentrality, Tail tail) {
  const double half_lambda = 0.5 * noncentrality;
  const long mode = static_cast<long>(std::floor(half_lambda));
  const double log_w0 = -half_lambda + mode * std::log(half_lambda) - std::lgamma(mode + 1.0);
  const double w0 = std::exp(log_w0);
  if (!std::isfinite(w0)) return kNaN;

  auto negligible = [](double rest_weight, double cap, double sum) {
    return rest_weight * cap <= kSeriesTol * sum || rest_weight * cap < 1e-300;
  };

  const double t0 = tail(dof + 2.0 * mode);
  double sum = w0 * t0;
  double w = w0;
  double prev_t = t0;
  long count = 0;
  for (long j = mode + 1;; ++j) {
    w *= half_lambda / j;
    const double t = tail(dof + 2.0 * j);
    sum += w * t;
    const double r = half_lambda / (j + 1.0);
    if (r < 1.0) {
      const double rest = w * r / (1.0 - r);
      if (negligible(rest, t <= prev_t ? t : 1.0, sum)) break;
    }
    prev_t = t;
    if (++count > kMaxSeriesTerms) return kNaN;
  }
  w = w0;
  prev_t = t0;
  for (long j = mode; j > 0; --j) {
    w *= j / half_lambda;
    const double t = tail(dof + 2.0 * (j - 1));
    sum += w * t;
    const double r = (j - 1.0) / half_lambda;
    const double rest = r < 1.0 ? w * r / (1.0 - r) : kInf;
    if (negligible(rest, t <= prev_t ? t : 1.0, sum)) break;
    prev_t = t;
    if (++count > kMaxSeriesTerms) return kNaN;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

double ncx2_cdf(double x, double dof, double noncentrality) {
  if (!(dof > 0.0) || !(noncentrality >= 0.0) || std::isnan(x)) return kNaN;
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(x)) return 1.0;
  auto lower = [x](double nu) { return bm::gamma_p(0.5 * nu, 0.5 * x, QuietPolicy()); };
  if (noncentrality == 0.0) return lower(dof);
  return poisson_mixture(dof, noncentrality, lower);
}

double ncx2_sf(double x, double dof, double noncentrality) {
  if (!(dof > 0.0) || !(noncentrality >= 0.0) || std::isnan(x)) return kNaN;
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  auto upper = [x](double nu) { return bm::gamma_q(0.5 * nu, 0.5 * x, QuietPolicy()); };
  if (noncentrality == 0.0) return upper(dof);
  return poisson_mixture(dof, noncentrality, upper);
}

// ---------------------------------------------------------------------------

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int max_depth;
  long n_evals = 0;
  bool converged = true;
  bool failed = false;
  double error = 0.0;

  double eval(double x) {
    ++n_evals;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::isnan(delta)) {
      failed = true;
      return kNaN;
    }
    if (std::abs(delta) <= 15.0 * tol || m <= a || b <= m) {
      error += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth >= max_depth) {
      converged = false;
      error += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    const double l = recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
    if (failed) return kNaN;
    return l + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
    throw std::invalid_argument("adaptive_simpson: tolerances must be positive");
  }
  QuadratureResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  constexpr int kPanels = 8;
  SimpsonState st{f, spec.max_depth};
  std::array<double, 2 * kPanels + 1> fx{};
  const double h = (b - a) / (2 * kPanels);
  for (int i = 0; i <= 2 * kPanels; ++i) fx[i] = st.eval(a + i * h);

  std::array<double, kPanels> whole{};
  double coarse = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    whole[p] = h / 3.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    coarse += whole[p];
  }
  if (std::isnan(coarse)) {
    out.value = kNaN;
    out.converged = false;
    out.n_evals = st.n_evals;
    return out;
  }
  const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(coarse)) / kPanels;

  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + 2 * p * h;
    const double pb = (p == kPanels - 1) ? b : pa + 2 * h;
    total += st.recurse(pa, pb, fx[2 * p], fx[2 * p + 1], fx[2 * p + 2], whole[p], tol, 1);
    if (st.failed) break;
  }
  out.value = st.failed ? kNaN : sign * total;
  out.error_estimate = st.error;
  out.converged = st.converged && !st.failed;
  out.n_evals = st.n_evals;
  return out;
}

QuadratureResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a,
                                        double b, const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
    throw std::invalid_argument("adaptive_gauss_kronrod: tolerances must be positive");
  }
  QuadratureResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  struct Piece {
    double lo, hi, value, error;
    int level;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  bool saw_nan = false;
  auto rule = [&](double lo, double hi, int level) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (lo + hi);
    auto mapped = [&](double t) {
      const double v = f(mid + half * t);
      if (std::isnan(v)) saw_nan = true;
      return std::isnan(v) ? 0.0 : v;
    };
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        mapped, -1.0, 1.0, 0, 0.0, &err, &l1);
    out.n_evals += 15;
    // Errors below the rounding level of the panel cannot be reduced further.
    err = half * err;
    if (err < 50.0 * std::numeric_limits<double>::epsilon() * half * l1) err = 0.0;
    return Piece{lo, hi, half * v, err, level};
  };

  std::priority_queue<Piece> heap;
  Piece first = rule(a, b, 0);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  std::vector<Piece> done;
  constexpr int kMaxPieces = 4000;
  while (!heap.empty() && !saw_nan) {
    if (error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) break;
    Piece top = heap.top();
    if (top.error == 0.0) break;
    heap.pop();
    if (top.level >= spec.max_depth || static_cast<int>(heap.size() + done.size()) >= kMaxPieces) {
      done.push_back(top);
      out.converged = false;
      continue;
    }
    const double mid = 0.5 * (top.lo + top.hi);
    const Piece l = rule(top.lo, mid, top.level + 1);
    const Piece r = rule(mid, top.hi, top.level + 1);
    total += l.value + r.value - top.value;
    error += l.error + r.error - top.error;
    heap.push(l);
    heap.push(r);
  }
  if (saw_nan) {
    out.value = kNaN;
    out.converged = false;
    return out;
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  error = 0.0;
  for (const auto& p : done) {
    total += p.value;
    error += p.error;
  }
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = sign * total;
  out.error_estimate = error;
  if (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& opts) {
  const std::size_t n = simplex.empty() ? 0 : simplex.front().size();
  if (n == 0 || simplex.size() != n + 1) {
    throw std::invalid_argument("nelder_mead: simplex must have dim + 1 vertices");
  }
  for (const auto& v : simplex) {
    if (v.size() != n) throw std::invalid_argument("nelder_mead: ragged simplex");
  }

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.n_evals;
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };

  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = std::move(simplex[order[i]]);
      f2[i] = fv[order[i]];
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };

  auto point = [&](std::vector<double>& out, double t, const std::vector<double>& towards) {
    // out = centroid + t * (towards - centroid)
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (towards[k] - centroid[k]);
  };

  sort_simplex();
  while (true) {
    if (std::isfinite(fv[0]) &&
        fv[n] - fv[0] <= opts.rel_tol * (std::abs(fv[0]) + opts.rel_tol)) {
      res.converged = true;
      break;
    }
    if (res.n_evals >= opts.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    for (auto& c : centroid) c /= static_cast<double>(n);

    point(xr, -opts.reflection, simplex[n]);
    const double fr = eval(xr);

    bool do_shrink = false;
    if (fr < fv[0]) {
      point(xe, -opts.reflection * opts.expansion, simplex[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else if (fr < fv[n]) {
      point(xc, -opts.reflection * opts.contraction, simplex[n]);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      point(xc, opts.contraction, simplex[n]);
      const double fc = eval(xc);
      if (fc < fv[n]) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        do_shrink = true;
      }
    }

    if (do_shrink) {
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t k = 0; k < n; ++k)
          simplex[i][k] = simplex[0][k] + opts.shrink * (simplex[i][k] - simplex[0][k]);
        fv[i] = eval(simplex[i]);
      }
    }
    sort_simplex();
  }
  res.x = simplex[0];
  res.f = fv[0];
  return res;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> steps,
                             const NelderMeadOptions& opts) {
  if (x0.size() != steps.size()) throw std::invalid_argument("nelder_mead: size mismatch");
  std::vector<std::vector<double>> simplex(x0.size() + 1,
                                           std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < x0.size(); ++i) simplex[i + 1][i] += steps[i];
  return nelder_mead(f, std::move(simplex), opts);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

KeyedStream::KeyedStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  seed_from(seed, std::span<const std::uint64_t>(keys.begin(), keys.size()));
}

KeyedStream::KeyedStream(std::uint64_t seed, std::span<const std::uint64_t> keys) {
  seed_from(seed, keys);
}

void KeyedStream::seed_from(std::uint64_t seed, std::span<const std::uint64_t> keys) {
  std::uint64_t h = seed;
  std::uint64_t acc = splitmix64(h);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::uint64_t k = keys[i] + 0xD1B54A32D192ED03ULL * (i + 1);
    acc ^= splitmix64(k);
    std::uint64_t a = acc;
    acc = splitmix64(a);
  }
  std::uint64_t s = acc;
  for (auto& word : state_) word = splitmix64(s);
}

KeyedStream::result_type KeyedStream::operator()() {
  // xoshiro256**
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double KeyedStream::uniform() {
  while (true) {
    const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double KeyedStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  has_spare_normal_ = true;
  return u * m;
}

double KeyedStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(*this);
}

long KeyedStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(*this);
}

// ---------------------------------------------------------------------------

double one_minus_exp_over_rate(double rate, double t) {
  if (rate == 0.0) return t;
  return -std::expm1(-rate * t) / rate;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return kNaN;
  if (sorted.size() == 1) return sorted.front();
  const double h = (sorted.size() - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace killedfit::numerics
