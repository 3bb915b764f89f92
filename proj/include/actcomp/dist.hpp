#pragma once

#include "actcomp/core.hpp"
#include "actcomp/histogram.hpp"
#include "actcomp/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace actcomp {

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step against std::erfc; absolute error below 1e-9 on (0, 1).
double std_normal_quantile(double p);

/// Normal(B/2, sigma) clamped to [0, B], with sigma chosen so that each clamp
/// atom carries mass exactly 1/D: sigma = -(B/2) / quantile(1/D).
class ClippedNormal {
 public:
  ClippedNormal(int bits, double d);

  int bits() const { return bits_; }
  double levels() const { return levels_; }
  double d() const { return d_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  /// Mass of each clamp atom, 1/D.
  double atom_mass() const { return 1.0 / d_; }

 private:
  int bits_;
  double levels_;
  double d_;
  double mu_;
  double sigma_;
};

struct NormalParams {
  double mu;
  double sigma;
};

NormalParams cn_params(int bits, double d);

/// Density of the continuous part on (0, B); zero elsewhere.
double cn_pdf(double x, const ClippedNormal& dist);
/// P(X <= x), atoms included.
double cn_cdf(double x, const ClippedNormal& dist);

std::vector<double> cn_sample(const ClippedNormal& dist, std::size_t n, SeededRng& rng);

/// Probability of each histogram bin under the model; bins are [lo, hi) with
/// the last one closed, so the atoms at 0 and B fall into the end bins.
std::vector<double> cn_bin_masses(const ClippedNormal& dist, std::span<const double> edges);
/// Same for the uniform distribution on [0, levels].
std::vector<double> uniform_bin_masses(double levels, std::span<const double> edges);

/// Jensen-Shannon divergence in nats between two discrete distributions.
/// Inputs are normalized first; zero-mass bins contribute nothing.
double js_divergence(std::span<const double> p, std::span<const double> q);
double js_divergence(const Histogram& p, const Histogram& q);

/// The naive fit: a normalized projected activation map with R columns is
/// modeled as CN_[1/R].
ClippedNormal fit_cn_to_activations(const DenseMatrix& normalized, int bits);

inline constexpr std::size_t kFitHistogramBins = 64;

struct DistributionFit {
  std::size_t r_dim = 0;
  double jsd_uniform = 0.0;
  double jsd_clipped_normal = 0.0;
};

/// Histogram of `normalized` (values in [0, B]) against the uniform model and
/// CN_[1/r_dim] on a shared equal-width grid.
DistributionFit fit_distribution(std::span<const float> normalized, std::size_t r_dim, int bits,
                                 std::size_t bins = kFitHistogramBins);

/// Several runs of the same layer: per-run bin probabilities are averaged
/// into one observed density before comparing.
DistributionFit fit_distribution_pooled(std::span<const std::vector<float>> runs, std::size_t r_dim, int bits,
                                        std::size_t bins = kFitHistogramBins);

}  // namespace actcomp
