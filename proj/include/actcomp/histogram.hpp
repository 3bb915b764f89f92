#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace actcomp {

/// Tallies over half-open bins [edges[i], edges[i+1]); the last bin is closed.
/// Values outside [edges.front(), edges.back()] land in underflow/overflow and
/// are not part of `total`.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::size_t bins() const { return counts.size(); }
  /// counts / total. Empty histograms give all zeros.
  std::vector<double> probabilities() const;
};

/// `count` equal-width bins spanning [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t count);

Histogram build_histogram(std::span<const float> values, std::span<const double> edges);
Histogram build_histogram(std::span<const double> values, std::span<const double> edges);

}  // namespace actcomp
