#include "actcomp/core.hpp"
#include "actcomp/histogram.hpp"
#include "actcomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

namespace actcomp {

// ---------------------------------------------------------------------------
// SeededRng

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::below: n must be positive");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix DenseMatrix::from_values(std::size_t rows, std::size_t cols, std::vector<float> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: expected " + std::to_string(rows * cols) +
                                " values, got " + std::to_string(data.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw std::invalid_argument("DenseMatrix: non-finite value at flat index " + std::to_string(i));
    }
  }
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const float aik = a(i, k);
      if (aik == 0.0f) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: row count mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const float aki = arow[i];
      if (aki == 0.0f) continue;
      auto out = c.row(i);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: column count mismatch");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      float acc = 0.0f;
      for (std::size_t k = 0; k < arow.size(); ++k) acc += arow[k] * brow[k];
      c(i, j) = acc;
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// ---------------------------------------------------------------------------
// SparseAdjacency

void SparseAdjacency::validate() const {
  if (edges.size() != values.size()) {
    throw std::invalid_argument("SparseAdjacency: edges and values differ in length");
  }
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) {
      throw std::out_of_range("SparseAdjacency: edge (" + std::to_string(e.src) + ", " +
                              std::to_string(e.dst) + ") outside node range " + std::to_string(n));
    }
  }
}

SparseAdjacency SparseAdjacency::from_edges(std::size_t n, std::vector<Edge> edges) {
  SparseAdjacency a;
  a.n = n;
  a.values.assign(edges.size(), 1.0f);
  a.edges = std::move(edges);
  a.validate();
  return a;
}

namespace {

// Merged A + I with input self-loops dropped; keyed by (src, dst).
std::map<std::pair<std::uint32_t, std::uint32_t>, double> with_self_loops(const SparseAdjacency& a) {
  if (a.n == 0) throw std::invalid_argument("normalize_adjacency: graph has no nodes");
  a.validate();
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> entries;
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    const auto& e = a.edges[k];
    if (a.values[k] < 0.0f) throw std::invalid_argument("normalize_adjacency: negative edge weight");
    if (e.src == e.dst) continue;
    entries[{e.src, e.dst}] += a.values[k];
  }
  for (std::uint32_t i = 0; i < a.n; ++i) entries[{i, i}] = 1.0;
  return entries;
}

}  // namespace

SparseAdjacency normalize_adjacency(const SparseAdjacency& a) {
  const auto entries = with_self_loops(a);
  std::vector<double> degree(a.n, 0.0);
  for (const auto& [key, w] : entries) degree[key.first] += w;

  SparseAdjacency out;
  out.n = a.n;
  out.edges.reserve(entries.size());
  out.values.reserve(entries.size());
  for (const auto& [key, w] : entries) {
    out.edges.push_back({key.first, key.second});
    out.values.push_back(static_cast<float>(w / std::sqrt(degree[key.first] * degree[key.second])));
  }
  return out;
}

SparseAdjacency mean_adjacency(const SparseAdjacency& a) {
  const auto entries = with_self_loops(a);
  std::vector<double> degree(a.n, 0.0);
  for (const auto& [key, w] : entries) degree[key.first] += w;

  SparseAdjacency out;
  out.n = a.n;
  for (const auto& [key, w] : entries) {
    out.edges.push_back({key.first, key.second});
    out.values.push_back(static_cast<float>(w / degree[key.first]));
  }
  return out;
}

DenseMatrix spmm(const SparseAdjacency& a, const DenseMatrix& h) {
  if (a.n != h.rows()) {
    throw std::invalid_argument("spmm: adjacency has " + std::to_string(a.n) + " nodes but H has " +
                                std::to_string(h.rows()) + " rows");
  }
  DenseMatrix out(a.n, h.cols());
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    const float w = a.values[k];
    auto dst = out.row(a.edges[k].src);
    auto src = h.row(a.edges[k].dst);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
  }
  return out;
}

DenseMatrix spmm_transposed(const SparseAdjacency& a, const DenseMatrix& h) {
  if (a.n != h.rows()) throw std::invalid_argument("spmm_transposed: dimension mismatch");
  DenseMatrix out(a.n, h.cols());
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    const float w = a.values[k];
    auto dst = out.row(a.edges[k].dst);
    auto src = h.row(a.edges[k].src);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallelism

std::size_t worker_count() {
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ACTCOMP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t lanes = std::min(worker_count(), n);
  if (lanes <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(lanes);
  const std::size_t chunk = (n + lanes - 1) / lanes;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    threads.emplace_back([&body, begin, end = std::min(n, begin + chunk)] { body(begin, end); });
  }
}

// ---------------------------------------------------------------------------
// Histogram

std::vector<double> Histogram::probabilities() const {
  std::vector<double> p(counts.size(), 0.0);
  if (total == 0) return p;
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / total;
  return p;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t count) {
  if (count == 0 || !(hi > lo)) throw std::invalid_argument("uniform_edges: need count >= 1 and hi > lo");
  std::vector<double> edges(count + 1);
  for (std::size_t i = 0; i <= count; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / count;
  edges.back() = hi;
  return edges;
}

namespace {

template <typename T>
Histogram histogram_impl(std::span<const T> values, std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("build_histogram: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("build_histogram: edges must be strictly increasing");
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (const T raw : values) {
    const double v = static_cast<double>(raw);
    if (v < edges.front()) {
      ++h.underflow;
    } else if (v > edges.back() || std::isnan(v)) {
      ++h.overflow;
    } else {
      auto it = std::upper_bound(edges.begin(), edges.end(), v);
      std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      bin = std::min(bin, h.counts.size() - 1);
      ++h.counts[bin];
      ++h.total;
    }
  }
  return h;
}

}  // namespace

Histogram build_histogram(std::span<const float> values, std::span<const double> edges) {
  return histogram_impl(values, edges);
}

Histogram build_histogram(std::span<const double> values, std::span<const double> edges) {
  return histogram_impl(values, edges);
}

}  // namespace actcomp
