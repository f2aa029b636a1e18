#pragma once

// Signature analysis of a spectrum, the closed-form constants c_m, c*, and
// gamma_k, the fixed-rank and diverging-rank centering/scaling maps, and
// evaluable limit-law CDFs (Gumbel, Weibull, plus Normal as the reference
// law of the QUE statistic).
//
// Conventions: every normalization acts affinely, normalized = scale*S +
// shift, on the raw statistic in the convention named by
// statistic_convention. All logs are natural.

#include <cmath>
#include <stdexcept>

#include "haarmax/quadratic_forms.hpp"
#include "haarmax/special_functions.hpp"

namespace haarmax {

struct SignatureData {
  double a = 0.0;       // largest value
  int m = 0;            // multiplicity of a
  double a_star = 0.0;  // largest absolute value
  int m_plus = 0;       // #{a_i == +a_star}
  int m_minus = 0;      // #{a_i == -a_star}
};

inline SignatureData signature(const Spectrum& spectrum) {
  SignatureData s;
  s.a = spectrum.values[0];
  for (double v : spectrum.values) s.a = std::max(s.a, v);
  s.a_star = 0.0;
  for (double v : spectrum.values) s.a_star = std::max(s.a_star, std::abs(v));
  for (double v : spectrum.values) {
    if (v == s.a) ++s.m;
    if (v == s.a_star) ++s.m_plus;
    if (v == -s.a_star) ++s.m_minus;
  }
  return s;
}

// c_m = log( Gamma(m/2) * sqrt(prod_{a_j != a} (1 - a_j/a)) ), defined when
// the top of the spectrum is positive. Depends on the a_j only through the
// ratios a_j/a.
inline double c_m_constant(const Spectrum& spectrum) {
  const SignatureData sig = signature(spectrum);
  if (!(sig.a > 0.0))
    throw std::domain_error("c_m_constant: largest spectrum value must be positive "
                            "(all-negative spectra are in the Weibull regime)");
  double log_prod = 0.0;
  for (double v : spectrum.values)
    if (v != sig.a) log_prod += std::log1p(-v / sig.a);
  return std::lgamma(0.5 * sig.m) + 0.5 * log_prod;
}

// Three-case constant for the two-sided statistic; the m_plus and m_minus
// branches swap under spectrum negation, and the balanced case combines both
// products through a harmonic-style mean.
inline double c_star_constant(const Spectrum& spectrum) {
  const SignatureData sig = signature(spectrum);
  const double as = sig.a_star;
  double log_prod_plus = 0.0;   // over a_j != +a_star of (1 - a_j/a_star)
  double log_prod_minus = 0.0;  // over a_j != -a_star of (1 + a_j/a_star)
  for (double v : spectrum.values) {
    if (v != as) log_prod_plus += std::log1p(-v / as);
    if (v != -as) log_prod_minus += std::log1p(v / as);
  }
  if (sig.m_plus > sig.m_minus)
    return std::lgamma(0.5 * sig.m_plus) + 0.5 * log_prod_plus;
  if (sig.m_plus < sig.m_minus)
    return std::lgamma(0.5 * sig.m_minus) + 0.5 * log_prod_minus;
  // balanced: log( Gamma(m/2) / (exp(-log_prod_plus/2) + exp(-log_prod_minus/2))^{-1} )
  const double inv_sum =
      std::exp(-0.5 * log_prod_plus) + std::exp(-0.5 * log_prod_minus);
  return std::lgamma(0.5 * sig.m_plus) - std::log(inv_sum);
}

// gamma_k = (1/2) * (2 / (k Gamma(k/2)))^(2/k), the Weibull scale constant.
inline double gamma_k_constant(int k) {
  if (k < 1) throw ArgumentError("gamma_k_constant: k >= 1 required");
  const double log_inner = std::log(2.0) - std::log(static_cast<double>(k)) -
                           std::lgamma(0.5 * k);
  return 0.5 * std::exp((2.0 / k) * log_inner);
}

enum class LawKind { Gumbel, Weibull, Normal };

struct LimitLaw {
  LawKind kind = LawKind::Gumbel;
  double shape = 0.0;  // Weibull only (= k/2)
};

inline double law_cdf(const LimitLaw& law, double x) {
  switch (law.kind) {
    case LawKind::Gumbel:
      return std::exp(-std::exp(-x));
    case LawKind::Weibull:
      if (!(law.shape > 0.0)) throw ArgumentError("law_cdf: Weibull needs shape > 0");
      return (x < 0.0) ? std::exp(-std::pow(-x, law.shape)) : 1.0;
    case LawKind::Normal:
      return 0.5 * std::erfc(-x * M_SQRT1_2);
  }
  throw ArgumentError("law_cdf: unknown kind");
}

enum class StatisticConvention { HaarTimesN, Gaussian };

struct Normalization {
  double scale = 1.0;  // nonzero; negative exactly in the Min/Weibull case
  double shift = 0.0;
  LimitLaw law;
  StatisticConvention convention = StatisticConvention::HaarTimesN;

  double normalize(double s) const { return scale * s + shift; }
};

// Fixed-rank normalization on the x N statistic convention.
//
// MaxSigned, top positive:  (2a)^{-1} S - log N + (1 - m/2) log log N + c_m -> Gumbel
// MaxAbs:                   same with a -> a_star, m -> max(m+, m-), c -> c*
// MaxSigned, all negative:  gamma_k N^{2/k} / prod|a_j|^{1/k} * S -> Weibull(k/2)
// Min, all positive:        sign-flip of the Weibull case; the scale is the
//                           negated Weibull scale so normalized = scale*S lands
//                           on the Weibull's nonpositive support.
inline Normalization normalization_fixed(const Spectrum& spectrum, long long N,
                                         ExtremalMode mode) {
  if (N < 3) throw ArgumentError("normalization_fixed: N >= 3 required");
  const SignatureData sig = signature(spectrum);
  const double logN = std::log(static_cast<double>(N));
  const double loglogN = std::log(logN);
  const int k = static_cast<int>(spectrum.k());

  Normalization norm;
  norm.convention = StatisticConvention::HaarTimesN;

  const auto weibull_scale = [&](double sign) {
    double log_prod_abs = 0.0;
    for (double v : spectrum.values) log_prod_abs += std::log(std::abs(v));
    const double scale = gamma_k_constant(k) *
                         std::exp((2.0 / k) * logN - log_prod_abs / k);
    norm.scale = sign * scale;
    norm.shift = 0.0;
    norm.law = LimitLaw{LawKind::Weibull, 0.5 * k};
  };

  switch (mode) {
    case ExtremalMode::MaxSigned:
      if (sig.a > 0.0) {
        norm.scale = 1.0 / (2.0 * sig.a);
        norm.shift = -logN + (1.0 - 0.5 * sig.m) * loglogN + c_m_constant(spectrum);
        norm.law = LimitLaw{LawKind::Gumbel, 0.0};
      } else {
        weibull_scale(+1.0);  // all-negative spectrum
      }
      break;
    case ExtremalMode::MaxAbs: {
      const int m_star = std::max(sig.m_plus, sig.m_minus);
      norm.scale = 1.0 / (2.0 * sig.a_star);
      norm.shift = -logN + (1.0 - 0.5 * m_star) * loglogN + c_star_constant(spectrum);
      norm.law = LimitLaw{LawKind::Gumbel, 0.0};
      break;
    }
    case ExtremalMode::Min: {
      double min_v = spectrum.values[0];
      for (double v : spectrum.values) min_v = std::min(min_v, v);
      if (!(min_v > 0.0))
        throw std::domain_error("normalization_fixed: Min mode requires an all-positive "
                                "spectrum (use MaxSigned on the negated spectrum otherwise)");
      weibull_scale(-1.0);
      break;
    }
  }
  return norm;
}

// Diverging-rank sequences. On the Gaussian statistic S = max_j <y_j, A y_j>
// with A the rank-k_N projection, (S - q_N)/p_N -> Gumbel, where
//   p_N = N^{alpha/2} / sqrt(log N)
//   q_N = N^alpha + 2 N^{alpha/2} (sqrt(log N) - log(4 pi log N)/(4 sqrt(log N))).
// The same map applies to the x N Haar statistic by the coupling.
inline Normalization normalization_diverging(long long N, double alpha, long long k_N) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("normalization_diverging: need 0 < alpha < 1");
  if (N < 3) throw ArgumentError("normalization_diverging: N >= 3 required");
  if (k_N < 1) throw ArgumentError("normalization_diverging: k_N >= 1 required");
  const double logN = std::log(static_cast<double>(N));
  const double Na2 = std::pow(static_cast<double>(N), 0.5 * alpha);
  const double p = Na2 / std::sqrt(logN);
  const double q = Na2 * Na2 +
                   2.0 * Na2 * (std::sqrt(logN) -
                                std::log(4.0 * M_PI * logN) / (4.0 * std::sqrt(logN)));
  Normalization norm;
  norm.scale = 1.0 / p;
  norm.shift = -q / p;
  norm.law = LimitLaw{LawKind::Gumbel, 0.0};
  norm.convention = StatisticConvention::Gaussian;
  return norm;
}

inline double diverging_p(long long N, double alpha) {
  return std::pow(static_cast<double>(N), 0.5 * alpha) /
         std::sqrt(std::log(static_cast<double>(N)));
}

inline double diverging_q(long long N, double alpha) {
  const double logN = std::log(static_cast<double>(N));
  const double Na2 = std::pow(static_cast<double>(N), 0.5 * alpha);
  return Na2 * Na2 + 2.0 * Na2 * (std::sqrt(logN) -
                                  std::log(4.0 * M_PI * logN) / (4.0 * std::sqrt(logN)));
}

// Rank-drift check: the theory wants k_N ~ N^alpha with deviation o(N^{alpha/2}).
// Returns true when |k_N - N^alpha| > N^{alpha/2 - eps}, i.e. when a warning
// is warranted.
inline bool diverging_rank_warning(long long N, double alpha, long long k_N,
                                   double eps = 0.05) {
  const double target = std::pow(static_cast<double>(N), alpha);
  const double budget = std::pow(static_cast<double>(N), 0.5 * alpha - eps);
  return std::abs(static_cast<double>(k_N) - target) > budget;
}

}  // namespace haarmax
