#include "actcomp/dist.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace actcomp {
namespace {

// Independent standard-normal CDF from the Maclaurin series of erf.
double series_cdf(double x) {
  const double z = x / std::numbers::sqrt2;
  double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
  }
  return 0.5 + sum / std::sqrt(std::numbers::pi);
}

double bisect_quantile(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (series_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(StdNormalQuantile, Median) { EXPECT_NEAR(std_normal_quantile(0.5), 0.0, 1e-12); }

TEST(StdNormalQuantile, OneSixteenthMatchesSeriesOracle) {
  const double oracle = bisect_quantile(1.0 / 16);
  EXPECT_NEAR(oracle, -1.53412, 1e-5);
  EXPECT_NEAR(std_normal_quantile(1.0 / 16), oracle, 1e-9);
}

TEST(StdNormalQuantile, AgreesWithOracleAcrossRange) {
  for (double p : {1e-4, 0.001, 0.02, 0.1, 0.3, 0.49, 0.7, 0.95, 0.999}) {
    EXPECT_NEAR(std_normal_quantile(p), bisect_quantile(p), 1e-9) << p;
  }
}

TEST(StdNormalQuantile, InverseProperty) {
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    EXPECT_NEAR(std_normal_cdf(std_normal_quantile(p)), p, 1e-8);
  }
  EXPECT_NEAR(std_normal_cdf(std_normal_quantile(1e-12)), 1e-12, 1e-18);
}

TEST(StdNormalQuantile, RejectsOutsideUnitInterval) {
  EXPECT_THROW(std_normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(std_normal_quantile(1.0), std::domain_error);
  EXPECT_THROW(std_normal_quantile(-0.5), std::domain_error);
}

TEST(CnParams, Int2D16) {
  const auto p = cn_params(2, 16);
  EXPECT_DOUBLE_EQ(p.mu, 1.5);
  EXPECT_NEAR(p.sigma, 1.5 / -bisect_quantile(1.0 / 16), 1e-9);
  EXPECT_NEAR(p.sigma, 0.97776, 1e-5);
}

TEST(CnParams, SigmaShrinksWithD) {
  double prev = cn_params(2, 3).sigma;
  for (double d : {4.0, 8.0, 64.0, 1024.0, 1e6}) {
    const double s = cn_params(2, d).sigma;
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(CnParams, EightBitMean) { EXPECT_DOUBLE_EQ(cn_params(8, 16).mu, 127.5); }

TEST(CnParams, RejectsSmallD) {
  EXPECT_THROW(cn_params(2, 2), std::invalid_argument);
  EXPECT_THROW(ClippedNormal(2, 1), std::invalid_argument);
}

TEST(ClippedNormal, CdfAtomsAndSymmetry) {
  const ClippedNormal cn(2, 16);
  EXPECT_NEAR(cn_cdf(0.0, cn), 1.0 / 16, 1e-15);
  EXPECT_NEAR(cn_cdf(1.5, cn), 0.5, 1e-15);
  EXPECT_EQ(cn_cdf(3.0, cn), 1.0);
  EXPECT_EQ(cn_cdf(-0.1, cn), 0.0);
  EXPECT_EQ(cn_cdf(3.1, cn), 1.0);
  EXPECT_NEAR(cn_cdf(2.9999999, cn), 1.0 - 1.0 / 16, 1e-6);
  EXPECT_EQ(cn_pdf(-0.5, cn), 0.0);
  EXPECT_EQ(cn_pdf(3.5, cn), 0.0);
  EXPECT_NEAR(cn_pdf(1.2, cn), cn_pdf(1.8, cn), 1e-15);
}

TEST(ClippedNormal, TotalMassIsOne) {
  for (double d : {4.0, 16.0, 512.0}) {
    const ClippedNormal cn(2, d);
    // Composite Simpson over (0, 3).
    const int n = 100000;
    const double h = 3.0 / n;
    double s = cn_pdf(1e-300, cn) + cn_pdf(3.0 - 1e-15, cn);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * cn_pdf(i * h, cn);
    EXPECT_NEAR(s * h / 3.0 + 2.0 / d, 1.0, 1e-8) << d;
  }
}

TEST(CnSample, ClipFractionsAndMean) {
  const ClippedNormal cn(2, 16);
  SeededRng rng(2024);
  const std::size_t n = 1000000;
  const auto xs = cn_sample(cn, n, rng);
  ASSERT_EQ(xs.size(), n);
  std::size_t zeros = 0, tops = 0;
  double sum = 0, sq = 0;
  for (double x : xs) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 3.0);
    zeros += x == 0.0;
    tops += x == 3.0;
    sum += x;
    sq += x * x;
  }
  const double p = 1.0 / 16;
  const double sd = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(zeros) / n, p, 4 * sd);
  EXPECT_NEAR(static_cast<double>(tops) / n, p, 4 * sd);
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.5, 4 * std::sqrt((sq / n - mean * mean) / n));
  EXPECT_TRUE(cn_sample(cn, 0, rng).empty());
}

TEST(CnBinMasses, SumToOneWithAtomsInEndBins) {
  const ClippedNormal cn(2, 16);
  const auto edges = uniform_edges(0, 3, 64);
  const auto m = cn_bin_masses(cn, edges);
  double total = 0;
  for (double v : m) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(m.front(), 1.0 / 16);
  EXPECT_NEAR(m.front(), m.back(), 1e-12);
}

TEST(JsDivergence, IdenticalIsZero) {
  const std::vector<double> p{0.1, 0.2, 0.7};
  EXPECT_EQ(js_divergence(p, p), 0.0);
  const std::vector<double> v{0.5, 1.5, 1.5, 2.9};
  const auto h = build_histogram(std::span<const double>(v), uniform_edges(0, 3, 6));
  EXPECT_EQ(js_divergence(h, h), 0.0);
}

TEST(JsDivergence, DisjointIsLn2) {
  const std::vector<double> p{1, 1, 0, 0}, q{0, 0, 3, 5};
  EXPECT_NEAR(js_divergence(p, q), std::numbers::ln2, 1e-15);
}

TEST(JsDivergence, SymmetricAndBounded) {
  SeededRng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(10), q(10);
    for (auto& v : p) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    for (auto& v : q) v = rng.uniform();
    const double a = js_divergence(p, q), b = js_divergence(q, p);
    EXPECT_NEAR(a, b, 1e-15);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, std::numbers::ln2 + 1e-15);
  }
}

TEST(JsDivergence, UniformVersusClippedNormalModel) {
  // Direct summation with bin masses from the series CDF.
  const double mu = 1.5, sigma = 1.5 / -bisect_quantile(1.0 / 16);
  const int bins = 64;
  std::vector<double> p(bins), q(bins, 1.0 / bins);
  for (int i = 0; i < bins; ++i) {
    const double a = 3.0 * i / bins, b = 3.0 * (i + 1) / bins;
    p[i] = series_cdf((b - mu) / sigma) - series_cdf((a - mu) / sigma);
  }
  p.front() += 1.0 / 16;
  p.back() += 1.0 / 16;
  double oracle = 0.0;
  for (int i = 0; i < bins; ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    oracle += 0.5 * p[i] * std::log(p[i] / m) + 0.5 * q[i] * std::log(q[i] / m);
  }
  const ClippedNormal cn(2, 16);
  const auto edges = uniform_edges(0, 3, bins);
  const double got = js_divergence(cn_bin_masses(cn, edges), uniform_bin_masses(3, edges));
  EXPECT_NEAR(got, oracle, 1e-10);
  EXPECT_NEAR(got, 0.03030873, 5e-8);
}

TEST(JsDivergence, RejectsMismatchedHistograms) {
  const std::vector<double> v{1.0};
  const auto a = build_histogram(std::span<const double>(v), uniform_edges(0, 3, 3));
  const auto b = build_histogram(std::span<const double>(v), uniform_edges(0, 3, 4));
  EXPECT_THROW(js_divergence(a, b), std::invalid_argument);
  const auto empty = build_histogram(std::span<const double>(), uniform_edges(0, 3, 3));
  EXPECT_THROW(js_divergence(a, empty), std::invalid_argument);
}

TEST(JsDivergence, SamplesAgreeWithModelHistogram) {
  const ClippedNormal cn(2, 16);
  SeededRng rng(8);
  const auto xs = cn_sample(cn, 1000000, rng);
  const auto edges = uniform_edges(0, 3, kFitHistogramBins);
  const auto h = build_histogram(std::span<const double>(xs), edges);
  EXPECT_LT(js_divergence(h.probabilities(), cn_bin_masses(cn, edges)), 0.001);
}

TEST(FitCn, DIsColumnCount) {
  EXPECT_EQ(fit_cn_to_activations(DenseMatrix(4, 16, 1.0f), 2).d(), 16.0);
  EXPECT_EQ(fit_cn_to_activations(DenseMatrix(2, 63, 0.0f), 2).d(), 63.0);
  EXPECT_THROW(fit_cn_to_activations(DenseMatrix(2, 8, 3.5f), 2), std::invalid_argument);
}

TEST(FitCn, SelfConsistentOnSyntheticData) {
  const ClippedNormal cn(2, 32);
  SeededRng rng(5);
  const auto xs = cn_sample(cn, 32 * 500, rng);
  std::vector<float> vals(xs.begin(), xs.end());
  const auto m = DenseMatrix::from_values(500, 32, vals);
  EXPECT_EQ(fit_cn_to_activations(m, 2).d(), 32.0);
  const auto fit = fit_distribution(m.values(), 32, 2);
  EXPECT_EQ(fit.r_dim, 32u);
  EXPECT_LT(fit.jsd_clipped_normal, fit.jsd_uniform);
}

TEST(FitDistribution, PooledRunsAverageDensities) {
  SeededRng rng(6);
  std::vector<std::vector<float>> runs;
  for (int r = 0; r < 3; ++r) {
    const auto xs = cn_sample(ClippedNormal(2, 16), 4000, rng);
    runs.emplace_back(xs.begin(), xs.end());
  }
  const auto pooled = fit_distribution_pooled(runs, 16, 2);
  EXPECT_LT(pooled.jsd_clipped_normal, pooled.jsd_uniform);
  EXPECT_THROW(fit_distribution_pooled({}, 16, 2), std::invalid_argument);
}

}  // namespace
}  // namespace actcomp
