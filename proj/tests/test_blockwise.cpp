#include "actcomp/blockwise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace actcomp {
namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SeededRng rng(seed);
  DenseMatrix m(rows, cols);
  for (auto& v : m.values()) v = static_cast<float>(rng.normal());
  return m;
}

TEST(BlockView, EvenSplit) {
  const auto v = BlockView::of(4, 4, 8);
  EXPECT_EQ(v.num_blocks, 2u);
  EXPECT_EQ(v.tail_len, 0u);
  EXPECT_EQ(v.block_length(1), 8u);
}

TEST(BlockView, TailBlock) {
  const auto v = BlockView::of(3, 3, 2);
  EXPECT_EQ(v.num_blocks, 5u);
  EXPECT_EQ(v.tail_len, 1u);
  EXPECT_EQ(v.block_length(3), 2u);
  EXPECT_EQ(v.block_length(4), 1u);
  EXPECT_GE(v.num_blocks * v.block_size, v.element_count());
  EXPECT_GT(v.element_count(), (v.num_blocks - 1) * v.block_size);
}

TEST(BlockView, ZeroBlockSizeThrows) { EXPECT_THROW(BlockView::of(2, 2, 0), std::invalid_argument); }

TEST(ReshapeBlocks, RoundTripIsIdentity) {
  for (std::size_t g : {1, 2, 3, 7, 9, 100}) {
    const auto m = random_matrix(3, 3, g);
    const auto blocked = reshape_blocks(m, g);
    EXPECT_EQ(restore_blocks(blocked), m);
    std::size_t total = 0;
    for (std::size_t b = 0; b < blocked.view.num_blocks; ++b) total += blocked.block(b).size();
    EXPECT_EQ(total, 9u);
  }
}

TEST(QuantizeBlockwise, RowAlignedBlocksMatchPerRowStatistics) {
  const auto m = random_matrix(6, 16, 1);
  SeededRng a(5), b(5);
  const auto block = quantize_blockwise(m, QuantScheme::block(2, 16), a);
  const auto row = quantize_per_row(m, QuantScheme::per_row(2), b);
  ASSERT_EQ(block.group_meta().size(), row.group_meta().size());
  for (std::size_t i = 0; i < row.group_meta().size(); ++i) EXPECT_EQ(block.group_meta()[i], row.group_meta()[i]);
}

TEST(QuantizeBlockwise, OutlierOnlyAffectsItsBlock) {
  auto m = random_matrix(4, 8, 2);
  SeededRng a(1), b(1);
  const auto clean = quantize_blockwise(m, QuantScheme::block(2, 4), a);
  m(2, 5) = 1000.0f;
  const auto dirty = quantize_blockwise(m, QuantScheme::block(2, 4), b);
  const std::size_t outlier_block = (2 * 8 + 5) / 4;
  for (std::size_t g = 0; g < clean.group_meta().size(); ++g) {
    if (g == outlier_block) {
      EXPECT_GT(dirty.group_meta()[g].range, clean.group_meta()[g].range);
    } else {
      EXPECT_EQ(dirty.group_meta()[g], clean.group_meta()[g]);
    }
  }
}

TEST(QuantizeBlockwise, RequiresBlockScheme) {
  SeededRng rng(1);
  EXPECT_THROW(quantize_blockwise(random_matrix(2, 2, 1), QuantScheme::per_row(2), rng), std::invalid_argument);
  EXPECT_THROW(quantize_per_row(random_matrix(2, 2, 1), QuantScheme::block(2, 2), rng), std::invalid_argument);
}

TEST(QuantizeBlockwise, ConstantMatrixExact) {
  const DenseMatrix m(5, 3, -2.25f);
  SeededRng rng(1);
  const auto q = quantize_blockwise(m, QuantScheme::block(4, 4), rng);
  EXPECT_EQ(dequantize_blockwise(q), m);
}

TEST(QuantizeBlockwise, ShapeAndGroupCountWithTail) {
  const auto m = random_matrix(3, 3, 3);
  SeededRng rng(1);
  const auto q = quantize_blockwise(m, QuantScheme::block(2, 2), rng);
  EXPECT_EQ(q.group_meta().size(), 5u);
  const auto back = dequantize_blockwise(q);
  EXPECT_EQ(back.rows(), 3u);
  EXPECT_EQ(back.cols(), 3u);
  for (auto c : q.codes()) EXPECT_LE(c, 3u);
}

TEST(QuantizeBlockwise, RoundTripUnbiased) {
  const auto m = random_matrix(4, 10, 4);
  const auto scheme = QuantScheme::block(2, 8);
  const int draws = 10000;
  std::vector<double> sum(m.size(), 0.0), sq(m.size(), 0.0);
  SeededRng rng(77);
  for (int t = 0; t < draws; ++t) {
    const auto back = dequantize_blockwise(quantize_blockwise(m, scheme, rng));
    for (std::size_t i = 0; i < m.size(); ++i) {
      sum[i] += back.values()[i];
      sq[i] += static_cast<double>(back.values()[i]) * back.values()[i];
    }
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double mean = sum[i] / draws;
    const double var = std::max(sq[i] / draws - mean * mean, 0.0);
    EXPECT_NEAR(mean, m.values()[i], 4 * std::sqrt(var / draws) + 1e-5) << i;
  }
}

TEST(QuantizeBlockwise, ThreadCountDoesNotChangeResult) {
  const auto m = random_matrix(64, 32, 5);
  SeededRng a(9), b(9);
  const auto q1 = quantize_blockwise(m, QuantScheme::block(2, 32), a);
  setenv("ACTCOMP_THREADS", "1", 1);
  const auto q2 = quantize_blockwise(m, QuantScheme::block(2, 32), b);
  unsetenv("ACTCOMP_THREADS");
  EXPECT_EQ(q1, q2);
}

TEST(QuantizeBlockwise, SerializeDeserializeBitwise) {
  const auto m = random_matrix(7, 9, 6);
  SeededRng rng(3);
  const auto q = quantize(m, QuantScheme::block(4, 5), rng);
  const auto bytes = q.serialize();
  const auto back = PackedQuantTensor::deserialize(bytes);
  EXPECT_EQ(back, q);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(dequantize(back), dequantize(q));
}

TEST(MemoryReport, WorkedExample) {
  const auto r = memory_report(16, 64, QuantScheme::block(2, 64));
  EXPECT_EQ(r.code_bits, 2048u);
  EXPECT_EQ(r.metadata_bits, 1024u);
  EXPECT_EQ(r.total_bits, 3072u);
  EXPECT_EQ(r.bytes, 384u);
  EXPECT_DOUBLE_EQ(r.ratio_vs_fp32, 3072.0 / (32.0 * 1024));
}

TEST(MemoryReport, Fp32IsRatioOne) {
  const auto r = memory_report(10, 20, std::nullopt);
  EXPECT_EQ(r.metadata_bits, 0u);
  EXPECT_EQ(r.total_bits, 32u * 200);
  EXPECT_DOUBLE_EQ(r.ratio_vs_fp32, 1.0);
}

TEST(MemoryReport, PerRowGroups) {
  const auto r = memory_report(10, 16, QuantScheme::per_row(4));
  EXPECT_EQ(r.code_bits, 640u);
  EXPECT_EQ(r.metadata_bits, 640u);
}

TEST(MemoryReport, StrictlyDecreasingWithDiminishingReturns) {
  std::uint64_t prev = 0, prev_drop = 0;
  for (std::size_t g = 2; g <= 64; g *= 2) {
    const auto total = memory_report(64, 16, QuantScheme::block(2, g)).total_bits;
    if (prev != 0) {
      EXPECT_LT(total, prev);
      const auto drop = prev - total;
      if (prev_drop != 0) {
        EXPECT_LT(drop, prev_drop);
      }
      prev_drop = drop;
    }
    prev = total;
  }
}

TEST(MemoryReport, AsymptoteIsOneGroup) {
  const auto r = memory_report(32, 8, QuantScheme::block(2, 256));
  EXPECT_EQ(r.total_bits, 32u * 8 * 2 + 64);
}

TEST(MemoryReport, MatchesSerializedSize) {
  for (std::size_t g : {1, 2, 3, 16, 64, 1000}) {
    for (int bits : {2, 4, 8}) {
      const auto m = random_matrix(13, 11, g + bits);
      SeededRng rng(1);
      const auto scheme = QuantScheme::block(bits, g);
      const auto q = quantize(m, scheme, rng);
      const auto report = memory_report(13, 11, scheme);
      EXPECT_EQ(q.serialize().size(), PackedQuantTensor::kHeaderBytes + report.bytes) << g << " " << bits;
    }
  }
}

}  // namespace
}  // namespace actcomp
