#pragma once

#include "actcomp/dist.hpp"
#include "actcomp/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace actcomp {

/// Full quantization grid {0 = a_0 < a_1 < ... < a_B = B}.
class BinEdges {
 public:
  explicit BinEdges(std::vector<double> edges);

  static BinEdges uniform(std::uint32_t levels);
  /// INT2 grid [0, alpha, beta, 3].
  static BinEdges int2(double alpha, double beta);

  std::span<const double> values() const { return edges_; }
  double levels() const { return edges_.back(); }
  std::size_t bins() const { return edges_.size() - 1; }
  /// Bins as [lo, hi); h == B falls in the last bin.
  std::size_t bin_of(double h) const;
  /// Mirror image h -> B - h.
  BinEdges mirrored() const;

 private:
  std::vector<double> edges_;
};

/// Variance of stochastic rounding at h: with [lo, hi) the bin containing h,
/// (hi - lo)(h - lo) - (h - lo)^2. Zero on every edge.
double sr_variance(double h, const BinEdges& edges);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kQuadratureTolerance = 1e-10;

/// Expected stochastic-rounding variance of a clipped-normal input: the sum
/// over bins of the integral of sr_variance times the density. The clamp atoms
/// sit on the outer edges and contribute nothing. Each bin is integrated by
/// adaptive Gauss-Kronrod; a per-bin error estimate above
/// kQuadratureTolerance raises QuadratureError.
double expected_variance(const BinEdges& edges, const ClippedNormal& dist);
double expected_variance(double alpha, double beta, const ClippedNormal& dist);

struct BoundaryOptimum {
  double alpha = 1.0;
  double beta = 2.0;
  double expected_variance = 0.0;
  double uniform_expected_variance = 0.0;
  /// True when the 2-D check found a better asymmetric point.
  bool refined = false;
};

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes expected_variance over INT2 inner edges 0 < alpha < beta < 3.
/// Golden-section search along beta = 3 - alpha to 1e-6, then a 2-D
/// neighbourhood check (and coordinate descent if it finds a lower point).
/// Throws OptimizerError when the minimum sits on the feasible boundary.
BoundaryOptimum optimize_boundaries(const ClippedNormal& dist);

struct BoundaryEntry {
  std::uint32_t d = 0;
  double alpha = 1.0;
  double beta = 2.0;
  double expected_variance = 0.0;
};

/// Optimal INT2 edges for CN_[1/D], D in [kMinD, kMaxD], indexed by D.
class BoundaryTable {
 public:
  static constexpr std::uint32_t kMinD = 4;
  static constexpr std::uint32_t kMaxD = 2048;
  static constexpr int kGeneratorVersion = 1;

  static BoundaryTable build();
  /// Reads the CSV artifact; `#` lines are comments.
  static BoundaryTable read_csv(std::istream& in);
  static BoundaryTable load(const std::string& path);

  void write_csv(std::ostream& out) const;
  void save(const std::string& path) const;

  const BoundaryEntry& lookup(std::uint32_t d) const;
  std::span<const BoundaryEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  explicit BoundaryTable(std::vector<BoundaryEntry> entries);
  std::vector<BoundaryEntry> entries_;
};

/// Relative reduction in squared SR error when `optimized` replaces the
/// integer grid: 1 - sum (h - SR*(h))^2 / sum (h - SR(h))^2, summed over
/// `draws` rounds of every value. Both grids share each uniform draw. Returns
/// nullopt when the uniform-grid error is exactly zero.
std::optional<double> variance_reduction(std::span<const double> normalized, const BinEdges& optimized, SeededRng& rng,
                                         std::size_t draws = 64);

struct ReductionPoint {
  std::uint32_t d = 0;
  double reduction = 0.0;
};

/// variance_reduction for table entries D in [d_lo, d_hi], each evaluated
/// with the same random draws (a copy of `rng` per candidate).
std::vector<ReductionPoint> reduction_curve(std::span<const double> normalized, const BoundaryTable& table,
                                            std::uint32_t d_lo, std::uint32_t d_hi, const SeededRng& rng,
                                            std::size_t draws = 64);

}  // namespace actcomp
