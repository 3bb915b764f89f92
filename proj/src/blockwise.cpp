#include "actcomp/blockwise.hpp"

#include <stdexcept>

namespace actcomp {

BlockView BlockView::of(std::size_t rows, std::size_t cols, std::size_t block_size) {
  if (block_size == 0) throw std::invalid_argument("BlockView: block size must be at least 1");
  BlockView v;
  v.rows = rows;
  v.cols = cols;
  v.block_size = block_size;
  v.num_blocks = (rows * cols + block_size - 1) / block_size;
  v.tail_len = (rows * cols) % block_size;
  return v;
}

std::size_t BlockView::block_length(std::size_t block) const {
  if (block + 1 == num_blocks && tail_len != 0) return tail_len;
  return block_size;
}

BlockedValues reshape_blocks(const DenseMatrix& h, std::size_t block_size) {
  BlockedValues out;
  out.view = BlockView::of(h.rows(), h.cols(), block_size);
  out.values.assign(h.values().begin(), h.values().end());
  return out;
}

DenseMatrix restore_blocks(const BlockedValues& blocked) {
  return DenseMatrix::from_values(blocked.view.rows, blocked.view.cols, blocked.values);
}

namespace {

// Quantizes consecutive groups of the flattened matrix. group_len(g) gives
// each group's length; groups tile the flat index range in order.
template <typename LengthFn>
PackedQuantTensor quantize_groups(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng,
                                  std::size_t groups, std::size_t stride, LengthFn group_len) {
  const SeededRng base(rng.next_u64());
  std::vector<std::uint8_t> codes(h.size(), 0);
  std::vector<GroupMeta> meta(groups);
  const auto flat = h.values();
  const auto edges = scheme.full_edges();
  parallel_for(groups, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      SeededRng lane = base.substream(g);
      const std::size_t offset = g * stride;
      const std::size_t len = group_len(g);
      meta[g] = quantize_group(flat.subspan(offset, len), std::span(codes).subspan(offset, len), scheme, edges, lane);
    }
  });
  return PackedQuantTensor(scheme, h.rows(), h.cols(), pack_codes(codes, scheme.bits()), std::move(meta));
}

}  // namespace

PackedQuantTensor quantize_blockwise(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng) {
  if (scheme.grouping() != Grouping::kBlock) throw std::invalid_argument("quantize_blockwise: scheme is not block-wise");
  const BlockView view = BlockView::of(h.rows(), h.cols(), scheme.block_size());
  return quantize_groups(h, scheme, rng, view.num_blocks, view.block_size,
                         [&view](std::size_t g) { return view.block_length(g); });
}

PackedQuantTensor quantize_per_row(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng) {
  if (scheme.grouping() != Grouping::kPerRow) throw std::invalid_argument("quantize_per_row: scheme is not per-row");
  if (h.cols() == 0) throw std::invalid_argument("quantize_per_row: rows are empty");
  return quantize_groups(h, scheme, rng, h.rows(), h.cols(), [&h](std::size_t) { return h.cols(); });
}

PackedQuantTensor quantize(const DenseMatrix& h, const QuantScheme& scheme, SeededRng& rng) {
  return scheme.grouping() == Grouping::kBlock ? quantize_blockwise(h, scheme, rng) : quantize_per_row(h, scheme, rng);
}

DenseMatrix dequantize(const PackedQuantTensor& p) {
  const auto codes = p.codes();
  const auto meta = p.group_meta();
  const auto& scheme = p.scheme();
  const double levels = scheme.levels();
  std::vector<double> grid(scheme.levels() + 1);
  for (std::uint32_t k = 0; k <= scheme.levels(); ++k) grid[k] = scheme.edge_value(k) / levels;

  DenseMatrix out(p.rows(), p.cols());
  auto flat = out.values();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const GroupMeta& g = meta[p.group_of(i)];
    flat[i] = static_cast<float>(static_cast<double>(g.range) * grid[codes[i]] + g.zero_point);
  }
  return out;
}

DenseMatrix dequantize_blockwise(const PackedQuantTensor& p) {
  if (p.scheme().grouping() != Grouping::kBlock) throw std::invalid_argument("dequantize_blockwise: tensor is not block-wise");
  return dequantize(p);
}

MemoryReport memory_report(std::size_t n, std::size_t r_dim, const std::optional<QuantScheme>& scheme) {
  if (n == 0 || r_dim == 0) throw std::invalid_argument("memory_report: n and r_dim must be positive");
  MemoryReport m;
  const std::uint64_t elements = static_cast<std::uint64_t>(n) * r_dim;
  if (scheme) {
    m.code_bits = elements * scheme->bits();
    m.metadata_bits = static_cast<std::uint64_t>(scheme->group_count(n, r_dim)) * 2 * 32;
  } else {
    m.code_bits = elements * 32;
  }
  m.total_bits = m.code_bits + m.metadata_bits;
  m.bytes = (m.total_bits + 7) / 8;
  m.ratio_vs_fp32 = static_cast<double>(m.total_bits) / (32.0 * static_cast<double>(elements));
  return m;
}

}  // namespace actcomp
