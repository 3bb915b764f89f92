#pragma once

#include "actcomp/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace actcomp {

enum class Grouping : std::uint32_t {
  kPerRow = 0,
  kBlock = 1,
};

/// Bit width, grouping and bin boundaries of a quantizer.
///
/// Codes live on the normalized grid [0, B] with B = 2^bits - 1. With uniform
/// boundaries code k sits at k; with explicit boundaries the caller supplies
/// the B - 1 inner edges and code k sits at the k-th edge of
/// {0, inner..., B}.
class QuantScheme {
 public:
  static QuantScheme per_row(int bits);
  static QuantScheme block(int bits, std::size_t block_size);

  /// Copy of this scheme with explicit inner edges; they must be strictly
  /// increasing, lie in (0, B) and number exactly B - 1.
  QuantScheme with_edges(std::vector<double> inner_edges) const;

  int bits() const { return bits_; }
  std::uint32_t levels() const { return (1u << bits_) - 1u; }
  Grouping grouping() const { return grouping_; }
  std::size_t block_size() const { return block_size_; }
  bool uniform() const { return inner_edges_.empty(); }
  std::span<const double> inner_edges() const { return inner_edges_; }

  /// {0, inner..., B}; for uniform schemes {0, 1, ..., B}.
  std::vector<double> full_edges() const;
  /// Normalized value a code dequantizes to.
  double edge_value(std::uint32_t code) const;

  /// Number of (zero-point, range) groups for a rows x cols matrix.
  std::size_t group_count(std::size_t rows, std::size_t cols) const;

  bool operator==(const QuantScheme&) const = default;

 private:
  QuantScheme(int bits, Grouping grouping, std::size_t block_size);

  int bits_ = 2;
  Grouping grouping_ = Grouping::kPerRow;
  std::size_t block_size_ = 0;
  std::vector<double> inner_edges_;
};

/// Tolerance for normalized inputs that stray outside [0, B] by rounding.
inline constexpr double kNormalizedSlack = 1e-6;

/// Stochastic rounding with unit bins: floor(h) + 1 with probability
/// h - floor(h). Integers come back unchanged.
std::uint32_t sr_uniform(double h, std::uint32_t levels, SeededRng& rng);

/// Stochastic rounding on an arbitrary edge grid {0 = a_0 < ... < a_B = B}.
/// Inside bin [a_{i-1}, a_i) it rounds up to code i with probability
/// (h - a_{i-1}) / (a_i - a_{i-1}). Values on an edge return that edge's code.
std::uint32_t sr_nonuniform(double h, std::span<const double> edges, SeededRng& rng);

/// Same rounding rule with the uniform variate `u` in [0, 1) supplied by the
/// caller, so several grids can share one draw.
std::uint32_t stochastic_round(double h, std::span<const double> edges, double u);

struct QuantizedGroup {
  std::vector<std::uint8_t> codes;
  float zero_point = 0.0f;
  float range = 0.0f;
};

/// Affine-normalizes `h` to [0, B] with Z = min, r = max - min and rounds
/// stochastically. A constant group stores r = 0 and all-zero codes.
QuantizedGroup quantize_row(std::span<const float> h, const QuantScheme& scheme, SeededRng& rng);

struct GroupMeta {
  float zero_point = 0.0f;
  float range = 0.0f;
  bool operator==(const GroupMeta&) const = default;
};

/// Allocation-free core of quantize_row: writes codes into `codes_out` and
/// returns the group's (Z, r). `edges` must be scheme.full_edges().
GroupMeta quantize_group(std::span<const float> h, std::span<std::uint8_t> codes_out, const QuantScheme& scheme,
                         std::span<const double> edges, SeededRng& rng);

/// r * edge_value(code) / B + Z.
std::vector<float> dequantize_row(std::span<const std::uint8_t> codes, float zero_point, float range,
                                  const QuantScheme& scheme);

/// Packs `bits`-wide codes little-endian within each byte, first code in the
/// lowest bits.
std::vector<std::uint8_t> pack_codes(std::span<const std::uint8_t> codes, int bits);
std::vector<std::uint8_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits, std::size_t count);

/// A compressed activation matrix: packed codes in row-major element order
/// plus one (zero-point, range) pair per group.
class PackedQuantTensor {
 public:
  PackedQuantTensor(QuantScheme scheme, std::size_t rows, std::size_t cols, std::vector<std::uint8_t> packed,
                    std::vector<GroupMeta> meta);

  const QuantScheme& scheme() const { return scheme_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t element_count() const { return rows_ * cols_; }
  std::span<const std::uint8_t> packed_codes() const { return packed_; }
  std::span<const GroupMeta> group_meta() const { return meta_; }

  std::vector<std::uint8_t> codes() const;
  /// Group index that owns flat element `index`.
  std::size_t group_of(std::size_t index) const;

  /// Container layout, little-endian:
  ///   "AQT1" | bits | mode | G | rows | cols | groups        (u32 each)
  ///   [B - 1 inner edges as f64, only when mode has kExplicitEdgesFlag]
  ///   groups x (Z, r) as f32 | packed code bytes
  std::vector<std::uint8_t> serialize() const;
  static PackedQuantTensor deserialize(std::span<const std::uint8_t> bytes);
  std::size_t serialized_size() const;

  static constexpr std::size_t kHeaderBytes = 28;
  static constexpr std::uint32_t kExplicitEdgesFlag = 0x100;

  bool operator==(const PackedQuantTensor&) const = default;

 private:
  QuantScheme scheme_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> packed_;
  std::vector<GroupMeta> meta_;
};

}  // namespace actcomp
