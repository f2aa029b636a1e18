#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "haarmax/limit_laws.hpp"
#include "haarmax/rng.hpp"
#include "haarmax/stats.hpp"

using namespace haarmax;

namespace {
double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }
double gumbel_quantile(double p) { return -std::log(-std::log(p)); }
}  // namespace

TEST(EmpiricalSample, SortsAndRejectsEmpty) {
  EmpiricalSample s({3.0, 1.0, 2.0});
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[2], 3.0);
  EXPECT_THROW(EmpiricalSample({}), ArgumentError);
}

TEST(KsDistance, OptimalQuantilePlacement) {
  // points at cdf^{-1}((i - 1/2)/m) realize the minimal distance 1/(2m)
  const std::size_t m = 40;
  std::vector<double> pts(m);
  for (std::size_t i = 0; i < m; ++i)
    pts[i] = gumbel_quantile((static_cast<double>(i) + 0.5) / m);
  const double d = ks_distance(EmpiricalSample(pts), gumbel_cdf);
  EXPECT_NEAR(d, 1.0 / (2.0 * m), 1e-12);
}

TEST(KsDistance, SinglePointAtMedian) {
  const double med = gumbel_quantile(0.5);
  EXPECT_NEAR(ks_distance(EmpiricalSample({med}), gumbel_cdf), 0.5, 1e-12);
}

TEST(KsDistance, GumbelSelfSampleUnderCritical) {
  const std::size_t m = 5000;
  RandomStream stream = substream(1234, 0);
  std::vector<double> draws(m);
  for (auto& d : draws) d = gumbel_quantile(stream.next_double());
  const double dist = ks_distance(EmpiricalSample(std::move(draws)), gumbel_cdf);
  EXPECT_LT(dist, 1.63 / std::sqrt(static_cast<double>(m)));
}

TEST(KsDistance, InvariantUnderMonotoneReparameterization) {
  RandomStream stream = substream(55, 0);
  std::vector<double> draws(200);
  for (auto& d : draws) d = gumbel_quantile(stream.next_double());
  const double d0 = ks_distance(EmpiricalSample(draws), gumbel_cdf);
  // exp is strictly increasing: compare exp-transformed sample against the
  // pushforward CDF
  std::vector<double> mapped(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) mapped[i] = std::exp(draws[i]);
  const double d1 = ks_distance(EmpiricalSample(mapped),
                                [](double y) { return gumbel_cdf(std::log(y)); });
  EXPECT_NEAR(d0, d1, 1e-13);
}

TEST(TwoSampleKs, EdgeCases) {
  EmpiricalSample a({1.0, 2.0, 3.0});
  EXPECT_EQ(two_sample_ks(a, a), 0.0);
  EmpiricalSample lo({1.0, 2.0}), hi({5.0, 6.0, 7.0});
  EXPECT_EQ(two_sample_ks(lo, hi), 1.0);
  EXPECT_EQ(two_sample_ks(lo, hi), two_sample_ks(hi, lo));
}

TEST(TwoSampleKs, TiesHandled) {
  // With heavy ties the sup must be taken after both ECDFs pass the tie block.
  EmpiricalSample a({1.0, 1.0, 1.0, 2.0});
  EmpiricalSample b({1.0, 2.0, 2.0, 2.0});
  // F_a(1)=3/4, F_b(1)=1/4 -> gap 1/2; at 2 both are 1.
  EXPECT_NEAR(two_sample_ks(a, b), 0.5, 1e-15);
}

TEST(TwoSampleKs, IndependentGumbelPairsUnderCritical) {
  const std::size_t m = 5000;
  RandomStream s1 = substream(77, 0);
  RandomStream s2 = substream(77, 1);
  std::vector<double> a(m), b(m);
  for (auto& v : a) v = gumbel_quantile(s1.next_double());
  for (auto& v : b) v = gumbel_quantile(s2.next_double());
  const double d = two_sample_ks(EmpiricalSample(std::move(a)), EmpiricalSample(std::move(b)));
  EXPECT_LT(d, 1.63 * std::sqrt(2.0 / static_cast<double>(m)));
}

TEST(Summary, ConstantAndTinySamples) {
  const auto sc = summary(EmpiricalSample({4.0, 4.0, 4.0}));
  EXPECT_EQ(sc.mean, 4.0);
  EXPECT_EQ(sc.variance, 0.0);
  for (double q : sc.quantiles) EXPECT_EQ(q, 4.0);

  const auto s123 = summary(EmpiricalSample({3.0, 1.0, 2.0}));
  EXPECT_NEAR(s123.mean, 2.0, 1e-15);
  EXPECT_NEAR(s123.quantiles[3], 2.0, 1e-15);  // median
  EXPECT_NEAR(s123.variance, 1.0, 1e-15);

  // single point: variance reported as 0
  EXPECT_EQ(summary(EmpiricalSample({7.5})).variance, 0.0);
}

TEST(Summary, QuantileInterpolation) {
  // {0, 10}: p=0.25 interpolates to 2.5
  EXPECT_NEAR(quantile(EmpiricalSample({0.0, 10.0}), 0.25), 2.5, 1e-15);
  EXPECT_THROW(quantile(EmpiricalSample({1.0}), 1.5), ArgumentError);
}

TEST(Summary, GumbelMeanNearEulerMascheroni) {
  const std::size_t m = 20000;
  RandomStream stream = substream(2718, 0);
  std::vector<double> draws(m);
  for (auto& d : draws) d = gumbel_quantile(stream.next_double());
  const auto s = summary(EmpiricalSample(std::move(draws)));
  // Gumbel mean gamma_E, sd pi/sqrt(6)
  const double se = (M_PI / std::sqrt(6.0)) / std::sqrt(static_cast<double>(m));
  EXPECT_NEAR(s.mean, 0.57721566490153286, 3.0 * se);
}
