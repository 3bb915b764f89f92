#include "actcomp/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace actcomp {

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_quantile: p must lie in (0, 1)");

  // Acklam's coefficients.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement.
  const double e = std_normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

NormalParams cn_params(int bits, double d) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("cn_params: unsupported bit width");
  if (!(d >= 3.0)) throw std::invalid_argument("cn_params: D must be at least 3, got " + std::to_string(d));
  const double mu = ((1u << bits) - 1u) / 2.0;
  return {mu, -mu / std_normal_quantile(1.0 / d)};
}

ClippedNormal::ClippedNormal(int bits, double d) : bits_(bits), levels_((1u << bits) - 1u), d_(d) {
  const auto params = cn_params(bits, d);
  mu_ = params.mu;
  sigma_ = params.sigma;
}

double cn_pdf(double x, const ClippedNormal& dist) {
  if (!(x > 0.0 && x < dist.levels())) return 0.0;
  return std_normal_pdf((x - dist.mu()) / dist.sigma()) / dist.sigma();
}

double cn_cdf(double x, const ClippedNormal& dist) {
  if (x < 0.0) return 0.0;
  if (x >= dist.levels()) return 1.0;
  return std_normal_cdf((x - dist.mu()) / dist.sigma());
}

namespace {

// P(X < x).
double cn_cdf_left(double x, const ClippedNormal& dist) {
  if (x <= 0.0) return 0.0;
  if (x > dist.levels()) return 1.0;
  return std_normal_cdf((x - dist.mu()) / dist.sigma());
}

}  // namespace

std::vector<double> cn_sample(const ClippedNormal& dist, std::size_t n, SeededRng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = std::clamp(dist.mu() + dist.sigma() * rng.normal(), 0.0, dist.levels());
  return out;
}

std::vector<double> cn_bin_masses(const ClippedNormal& dist, std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("cn_bin_masses: need at least two edges");
  std::vector<double> masses(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const bool last = i + 2 == edges.size();
    const double hi = last ? cn_cdf(edges[i + 1], dist) : cn_cdf_left(edges[i + 1], dist);
    masses[i] = hi - cn_cdf_left(edges[i], dist);
  }
  return masses;
}

std::vector<double> uniform_bin_masses(double levels, std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("uniform_bin_masses: need at least two edges");
  std::vector<double> masses(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = std::clamp(edges[i], 0.0, levels);
    const double hi = std::clamp(edges[i + 1], 0.0, levels);
    masses[i] = (hi - lo) / levels;
  }
  return masses;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("js_divergence: distributions have different bin counts");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("js_divergence: negative mass");
    sp += p[i];
    sq += q[i];
  }
  if (!(sp > 0.0) || !(sq > 0.0)) throw std::invalid_argument("js_divergence: empty distribution");

  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i] / sp;
    const double qi = q[i] / sq;
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) kl_p += pi * std::log(pi / mi);
    if (qi > 0.0) kl_q += qi * std::log(qi / mi);
  }
  return std::max(0.0, 0.5 * kl_p + 0.5 * kl_q);
}

double js_divergence(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges) throw std::invalid_argument("js_divergence: histogram edges differ");
  if (p.total == 0 || q.total == 0) throw std::invalid_argument("js_divergence: empty histogram");
  return js_divergence(p.probabilities(), q.probabilities());
}

ClippedNormal fit_cn_to_activations(const DenseMatrix& normalized, int bits) {
  const double levels = (1u << bits) - 1u;
  for (float v : normalized.values()) {
    if (!(v >= -1e-6 && v <= levels + 1e-6)) {
      throw std::invalid_argument("fit_cn_to_activations: value " + std::to_string(v) + " outside [0, B]");
    }
  }
  return ClippedNormal(bits, static_cast<double>(normalized.cols()));
}

namespace {

DistributionFit compare_models(const std::vector<double>& observed, std::span<const double> edges, std::size_t r_dim,
                               int bits) {
  const ClippedNormal model(bits, static_cast<double>(r_dim));
  DistributionFit fit;
  fit.r_dim = r_dim;
  fit.jsd_uniform = js_divergence(observed, uniform_bin_masses(model.levels(), edges));
  fit.jsd_clipped_normal = js_divergence(observed, cn_bin_masses(model, edges));
  return fit;
}

}  // namespace

DistributionFit fit_distribution(std::span<const float> normalized, std::size_t r_dim, int bits, std::size_t bins) {
  const auto edges = uniform_edges(0.0, (1u << bits) - 1u, bins);
  const Histogram h = build_histogram(normalized, edges);
  if (h.total == 0) throw std::invalid_argument("fit_distribution: no activations inside [0, B]");
  return compare_models(h.probabilities(), edges, r_dim, bits);
}

DistributionFit fit_distribution_pooled(std::span<const std::vector<float>> runs, std::size_t r_dim, int bits,
                                        std::size_t bins) {
  if (runs.empty()) throw std::invalid_argument("fit_distribution_pooled: no runs");
  const auto edges = uniform_edges(0.0, (1u << bits) - 1u, bins);
  std::vector<double> mean(bins, 0.0);
  for (const auto& run : runs) {
    const Histogram h = build_histogram(std::span<const float>(run), edges);
    if (h.total == 0) throw std::invalid_argument("fit_distribution_pooled: run has no activations inside [0, B]");
    const auto p = h.probabilities();
    for (std::size_t i = 0; i < bins; ++i) mean[i] += p[i] / static_cast<double>(runs.size());
  }
  return compare_models(mean, edges, r_dim, bits);
}

}  // namespace actcomp
