#pragma once

#include "actcomp/core.hpp"

#include <cstddef>
#include <cstdint>

namespace actcomp {

/// Normalized Rademacher matrix of shape (d_in, d_out) with entries
/// +-1/sqrt(d_out), so that E[R R^T] = I.
///
/// Only the seed is stored. Each entry's sign is a hash of (seed, row, col),
/// which lets project/recover regenerate the matrix one row at a time.
class RademacherProjector {
 public:
  RademacherProjector(std::size_t d_in, std::size_t d_out, std::uint64_t seed);

  /// d_out = max(1, d_in / d_over_r).
  static RademacherProjector from_ratio(std::size_t d_in, std::size_t d_over_r, std::uint64_t seed);

  std::size_t d_in() const { return d_in_; }
  std::size_t d_out() const { return d_out_; }
  std::uint64_t seed() const { return seed_; }
  float scale() const { return scale_; }

  float entry(std::size_t i, std::size_t j) const;
  /// Writes row i of the matrix into `out` (length d_out).
  void fill_row(std::size_t i, float* out) const;
  /// Dense copy, for tests and diagnostics.
  DenseMatrix realize() const;

 private:
  std::uint64_t sign_word(std::size_t i, std::size_t word) const;

  std::size_t d_in_;
  std::size_t d_out_;
  std::uint64_t seed_;
  float scale_;
};

/// H * R, (N x D) -> (N x R).
DenseMatrix project(const DenseMatrix& h, const RademacherProjector& p);
/// H_proj * R^T, (N x R) -> (N x D).
DenseMatrix recover(const DenseMatrix& h_proj, const RademacherProjector& p);

}  // namespace actcomp
