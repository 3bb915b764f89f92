#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace actcomp {

/// Row-major matrix of 32-bit reals.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Takes ownership of `data`; throws if the length is wrong or any entry
  /// is NaN/Inf.
  static DenseMatrix from_values(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// C = A * B.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// C = A^T * B.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// C = A * B^T.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

struct Edge {
  std::uint32_t src;
  std::uint32_t dst;
  bool operator==(const Edge&) const = default;
};

/// Coordinate-format sparse matrix over `n` nodes.
struct SparseAdjacency {
  std::size_t n = 0;
  std::vector<Edge> edges;
  std::vector<float> values;

  /// Checks index bounds and that edges/values have equal length.
  void validate() const;
  /// Unit-weight adjacency from an edge list.
  static SparseAdjacency from_edges(std::size_t n, std::vector<Edge> edges);
};

/// Returns D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I. Input
/// self-loops are dropped and duplicate (i, j) entries merged before the
/// identity is added. Output entries are sorted by (src, dst).
SparseAdjacency normalize_adjacency(const SparseAdjacency& a);

/// Returns D^{-1} (A + I): the row-normalized mean aggregator.
SparseAdjacency mean_adjacency(const SparseAdjacency& a);

/// A * H.
DenseMatrix spmm(const SparseAdjacency& a, const DenseMatrix& h);
/// A^T * H.
DenseMatrix spmm_transposed(const SparseAdjacency& a, const DenseMatrix& h);

/// Number of worker lanes for internal parallel loops. Honors ACTCOMP_THREADS.
std::size_t worker_count();

/// Runs body(begin, end) over a partition of [0, n). Results must not depend
/// on the partition; callers derive per-item RNG substreams.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace actcomp
