#pragma once

// Empirical samples, exact Kolmogorov-Smirnov distances (one- and two-sample)
// and basic summary statistics. The KS statistic is evaluated exactly at the
// ECDF jump points: D = max_i max(i/m - F(x_i), F(x_i) - (i-1)/m).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "haarmax/common.hpp"

namespace haarmax {

class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ArgumentError("EmpiricalSample: empty sample");
    std::sort(values_.begin(), values_.end());
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;  // ascending
};

// One-sample KS distance against a reference CDF.
inline double ks_distance(const EmpiricalSample& sample,
                          const std::function<double(double)>& cdf) {
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / m - f);
    d = std::max(d, f - static_cast<double>(i) / m);
  }
  return d;
}

// Two-sample KS distance: sup |F1 - F2| over the merged support, ties handled
// by advancing both ECDFs through equal values before comparing.
inline double two_sample_ks(const EmpiricalSample& a, const EmpiricalSample& b) {
  const auto& x = a.values();
  const auto& y = b.values();
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;                       // unbiased (m-1 denominator)
  static constexpr std::array<double, 7> levels{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
  std::array<double, 7> quantiles{};           // linear interpolation of order stats
};

// Quantile by linear interpolation between order statistics: position
// h = (m-1) p, value x[floor(h)] + frac * (x[floor(h)+1] - x[floor(h)]).
inline double quantile(const EmpiricalSample& sample, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile: p must be in [0,1]");
  const auto& x = sample.values();
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= x.size()) return x.back();
  const double frac = h - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

inline SummaryStats summary(const EmpiricalSample& sample) {
  SummaryStats s;
  const auto& x = sample.values();
  const double m = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / m;
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.variance = (x.size() > 1) ? ss / (m - 1.0) : 0.0;
  for (std::size_t q = 0; q < s.levels.size(); ++q)
    s.quantiles[q] = quantile(sample, s.levels[q]);
  return s;
}

}  // namespace haarmax
