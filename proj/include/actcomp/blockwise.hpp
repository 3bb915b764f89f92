#pragma once

#include "actcomp/core.hpp"
#include "actcomp/quant.hpp"
#include "actcomp/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace actcomp {

/// Row-major flattening of an (N, R) matrix into contiguous blocks of G
/// values. A final short block holds the remainder when G does not divide N*R.
struct BlockView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_size = 1;
  std::size_t num_blocks = 0;
  std::size_t tail_len = 0;

  static BlockView of(std::size_t rows, std::size_t cols, std::size_t block_size);

  std::size_t element_count() const { return rows * cols; }
  std::size_t block_offset(std::size_t block) const { return block * block_size; }
  std::size_t block_length(std::size_t block) const;
};

struct BlockedValues {
  BlockView view;
  std::vector<float> values;

  std::span<const float> block(std::size_t i) const {
    return std::span<const float>(values).subspan(view.block_offset(i), view.block_length(i));
  }
};

BlockedValues reshape_blocks(const DenseMatrix& h, std::size_t block_size);
/// Inverse of reshape_blocks.
DenseMatrix restore_blocks(const BlockedValues& blocked);

/// Per-block zero-point/range and stochastic rounding. Every block draws from
/// its own substream, so the result does not depend on thread count. `rng` is
/// advanced once per call.
PackedQuantTensor quantize_blockwise(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng);
DenseMatrix dequantize_blockwise(const PackedQuantTensor& p);

/// Per-row counterpart with the same substream discipline.
PackedQuantTensor quantize_per_row(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng);

/// Dispatches on the scheme's grouping.
PackedQuantTensor quantize(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng);
DenseMatrix dequantize(const PackedQuantTensor& p);

/// Storage cost of a quantized (n x r_dim) activation map.
struct MemoryReport {
  std::uint64_t code_bits = 0;
  std::uint64_t metadata_bits = 0;
  std::uint64_t total_bits = 0;
  std::uint64_t bytes = 0;
  double ratio_vs_fp32 = 0.0;
};

/// code_bits = n * r_dim * b and metadata_bits = groups * 64. A nullopt scheme
/// is the FP32 baseline: 32 bits per value and no metadata.
MemoryReport memory_report(std::size_t n, std::size_t r_dim, const std::optional<QuantScheme>& scheme);

}  // namespace actcomp
