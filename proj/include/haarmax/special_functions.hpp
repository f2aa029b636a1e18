#pragma once

// Special functions used by the limit laws and tail formulas: regularized
// upper incomplete gamma (series + Lentz continued fraction, linear and log
// forms), the saddle-point variable mu(t) = sqrt(t - log t - 1), the Wimp
// uniform asymptotic for Gamma(n, n t)/Gamma(n), and the exact finite-N CDF
// of the max of N independent a*chi^2_k variables.
//
// Incomplete gamma follows the classic split (series for x < s+1, continued
// fraction otherwise) with the modified Lentz algorithm; see Numerical
// Recipes ch. 6 and Lentz (1976). log_gamma and erfc wrap libm, which is
// well within the accuracy targets here.

#include <cmath>
#include <limits>

#include "haarmax/common.hpp"

namespace haarmax {

inline double log_gamma(double x) {
  if (!(x > 0.0))
    throw ArgumentError("log_gamma: requires x > 0, got " + std::to_string(x));
  return std::lgamma(x);
}

inline double erfc_fn(double x) { return std::erfc(x); }

// log erfc(x) for x >= 0 without underflow; switches to the asymptotic
// expansion once erfc itself leaves the comfortable double range.
inline double log_erfc(double x) {
  if (x < 0.0) throw ArgumentError("log_erfc: requires x >= 0");
  if (x <= 25.0) return std::log(std::erfc(x));
  const double r = 1.0 / (x * x);
  // erfc x ~ exp(-x^2)/(x sqrt(pi)) (1 - r/2 + 3r^2/4 - 15r^3/8), rel err
  // ~1e-11 at the switch point.
  const double corr = std::log1p(r * (-0.5 + r * (0.75 - 1.875 * r)));
  return -x * x - std::log(x) - 0.5 * std::log(M_PI) + corr;
}

namespace detail {

// Lower regularized gamma P(s,x) by power series; valid for x < s+1.
inline double gamma_p_series(double s, double x) {
  double ap = s;
  double sum = 1.0 / s;
  double del = sum;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw std::runtime_error("gamma_p_series: no convergence");
}

// log of the continued-fraction factor for Q(s,x); valid for x >= s+1 where
// the fraction is positive. Modified Lentz with FPMIN guards.
inline double gamma_q_cf_log(double s, double x) {
  constexpr double fpmin = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - s;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return -x + s * std::log(x) - std::lgamma(s) + std::log(h);
  }
  throw std::runtime_error("gamma_q_cf_log: no convergence");
}

}  // namespace detail

// log Q(s,x); stays finite long after Q(s,x) underflows double.
inline double log_reg_gamma_upper(double s, double x) {
  if (!(s > 0.0)) throw ArgumentError("log_reg_gamma_upper: requires s > 0");
  if (x < 0.0) throw ArgumentError("log_reg_gamma_upper: requires x >= 0");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return std::log1p(-detail::gamma_p_series(s, x));
  return detail::gamma_q_cf_log(s, x);
}

// Regularized upper incomplete gamma Q(s,x) = Gamma(s,x)/Gamma(s).
inline double reg_gamma_upper(double s, double x) {
  if (!(s > 0.0)) throw ArgumentError("reg_gamma_upper: requires s > 0");
  if (x < 0.0) throw ArgumentError("reg_gamma_upper: requires x >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - detail::gamma_p_series(s, x);
  return std::exp(detail::gamma_q_cf_log(s, x));
}

// Integer-order cross-check: Q(n,x) = exp(-x) sum_{m<n} x^m/m!, evaluated as
// a log-sum-exp so large x does not underflow. Only sensible for n <= 170
// (beyond that the direct factorial form loses its point).
inline double reg_gamma_upper_poisson(int n, double x) {
  if (n < 1 || n > 170) throw ArgumentError("reg_gamma_upper_poisson: need 1 <= n <= 170");
  if (x < 0.0) throw ArgumentError("reg_gamma_upper_poisson: requires x >= 0");
  if (x == 0.0) return 1.0;
  const double lx = std::log(x);
  double max_lt = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < n; ++m) max_lt = std::max(max_lt, m * lx - std::lgamma(m + 1.0));
  double sum = 0.0;
  for (int m = 0; m < n; ++m) sum += std::exp(m * lx - std::lgamma(m + 1.0) - max_lt);
  return std::exp(-x + max_lt + std::log(sum));
}

// mu(t) = sqrt(t - log t - 1) for t >= 1, with a series branch near t = 1
// where the direct form cancels: with u = t-1,
//   t - log t - 1 = u^2/2 * (1 - 2u/3 + u^2/2 - 2u^3/5 + ...).
inline double mu_of_t(double t) {
  if (!(t >= 1.0)) throw ArgumentError("mu_of_t: requires t >= 1");
  const double u = t - 1.0;
  if (u < 1e-4) {
    const double s = 1.0 - 2.0 * u / 3.0 + u * u / 2.0 - 2.0 * u * u * u / 5.0;
    return u * std::sqrt(0.5 * s);
  }
  return std::sqrt(u - std::log1p(u));
}

struct WimpEvaluation {
  double n = 0.0;
  double t = 0.0;
  double approx = 0.0;     // uniform asymptotic value (0 when underflowed)
  double exact = 0.0;      // Q(n, n t) (0 when underflowed)
  double rel_error = 0.0;  // |approx/exact - 1|, computed from log forms
};

// Wimp's uniform asymptotic for the normalized upper tail Q(n, n t), t >= 1:
//   Q(n, n t) ~ (1/sqrt(2)) * (mu(t)/(t-1)) * erfc(sqrt(n) mu(t)),
// with mu/(t-1) -> 1/sqrt(2) as t -> 1. Both sides underflow double well
// inside the advertised domain (n = 400, t > ~2.9), so the relative error is
// taken in log space, which agrees with |approx/exact - 1| whenever the
// linear values exist.
inline WimpEvaluation wimp_tail(double n, double t) {
  if (!(n > 0.0)) throw ArgumentError("wimp_tail: requires n > 0");
  if (!(t >= 1.0)) throw ArgumentError("wimp_tail: requires t >= 1");
  const double mu = mu_of_t(t);
  const double ratio = (std::abs(t - 1.0) < 1e-8) ? M_SQRT1_2 : mu / (t - 1.0);
  const double log_pref = std::log(M_SQRT1_2 * ratio);
  const double log_approx = log_pref + log_erfc(std::sqrt(n) * mu);
  const double log_exact = log_reg_gamma_upper(n, n * t);

  WimpEvaluation ev;
  ev.n = n;
  ev.t = t;
  ev.approx = std::exp(log_approx);
  ev.exact = std::exp(log_exact);
  ev.rel_error = std::abs(std::expm1(log_approx - log_exact));
  return ev;
}

// CDF of max_{j<=N} a*X_j with X_j i.i.d. chi^2_k: (1 - Q(k/2, x/(2a)))^N,
// zero for x <= 0. Uses exp(N log1p(-Q)) so N can be large.
inline double exact_gaussian_max_cdf(double N, double k, double a, double x) {
  if (!(N >= 1.0)) throw ArgumentError("exact_gaussian_max_cdf: requires N >= 1");
  if (!(k > 0.0)) throw ArgumentError("exact_gaussian_max_cdf: requires k > 0");
  if (!(a > 0.0)) throw ArgumentError("exact_gaussian_max_cdf: requires a > 0");
  if (x <= 0.0) return 0.0;
  const double q = reg_gamma_upper(0.5 * k, x / (2.0 * a));
  if (q >= 1.0) return 0.0;
  return std::exp(N * std::log1p(-q));
}

}  // namespace haarmax
