#include "actcomp/quant.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace actcomp {

// ---------------------------------------------------------------------------
// QuantScheme

QuantScheme::QuantScheme(int bits, Grouping grouping, std::size_t block_size)
    : bits_(bits), grouping_(grouping), block_size_(block_size) {
  if (bits != 2 && bits != 4 && bits != 8) {
    throw std::invalid_argument("QuantScheme: bits must be 2, 4 or 8, got " + std::to_string(bits));
  }
  if (grouping == Grouping::kBlock && block_size == 0) {
    throw std::invalid_argument("QuantScheme: block size must be at least 1");
  }
}

QuantScheme QuantScheme::per_row(int bits) { return QuantScheme(bits, Grouping::kPerRow, 0); }

QuantScheme QuantScheme::block(int bits, std::size_t block_size) {
  return QuantScheme(bits, Grouping::kBlock, block_size);
}

QuantScheme QuantScheme::with_edges(std::vector<double> inner_edges) const {
  const double b = levels();
  if (inner_edges.size() != levels() - 1) {
    throw std::invalid_argument("QuantScheme: expected " + std::to_string(levels() - 1) + " inner edges, got " +
                                std::to_string(inner_edges.size()));
  }
  double prev = 0.0;
  for (double e : inner_edges) {
    if (!(e > prev) || !(e < b)) {
      throw std::invalid_argument("QuantScheme: inner edges must be strictly increasing inside (0, B)");
    }
    prev = e;
  }
  QuantScheme copy = *this;
  copy.inner_edges_ = std::move(inner_edges);
  return copy;
}

std::vector<double> QuantScheme::full_edges() const {
  std::vector<double> edges;
  edges.reserve(levels() + 1);
  edges.push_back(0.0);
  if (uniform()) {
    for (std::uint32_t k = 1; k < levels(); ++k) edges.push_back(k);
  } else {
    edges.insert(edges.end(), inner_edges_.begin(), inner_edges_.end());
  }
  edges.push_back(levels());
  return edges;
}

double QuantScheme::edge_value(std::uint32_t code) const {
  if (code > levels()) throw std::out_of_range("QuantScheme::edge_value: code exceeds B");
  if (uniform() || code == 0) return code;
  if (code == levels()) return levels();
  return inner_edges_[code - 1];
}

std::size_t QuantScheme::group_count(std::size_t rows, std::size_t cols) const {
  if (grouping_ == Grouping::kPerRow) return rows;
  return (rows * cols + block_size_ - 1) / block_size_;
}

// ---------------------------------------------------------------------------
// Stochastic rounding

namespace {

double checked_clamp(double h, double levels) {
  if (!(h >= -kNormalizedSlack && h <= levels + kNormalizedSlack)) {
    throw std::out_of_range("stochastic rounding: normalized value " + std::to_string(h) + " outside [0, " +
                            std::to_string(levels) + "]");
  }
  return std::clamp(h, 0.0, levels);
}

}  // namespace

std::uint32_t sr_uniform(double h, std::uint32_t levels, SeededRng& rng) {
  h = checked_clamp(h, levels);
  const double lo = std::floor(h);
  const double frac = h - lo;
  const auto code = static_cast<std::uint32_t>(lo);
  if (frac == 0.0) return code;
  return rng.uniform() < frac ? code + 1 : code;
}

std::uint32_t stochastic_round(double h, std::span<const double> edges, double u) {
  const double top = edges.back();
  h = checked_clamp(h, top);
  // First edge strictly greater than h; h then lies in [edges[i-1], edges[i]).
  auto it = std::upper_bound(edges.begin(), edges.end(), h);
  if (it == edges.end()) return static_cast<std::uint32_t>(edges.size() - 1);
  const auto upper = static_cast<std::uint32_t>(it - edges.begin());
  const double lo = edges[upper - 1];
  if (h == lo) return upper - 1;
  const double p_up = (h - lo) / (edges[upper] - lo);
  return u < p_up ? upper : upper - 1;
}

std::uint32_t sr_nonuniform(double h, std::span<const double> edges, SeededRng& rng) {
  if (edges.size() < 2 || edges.front() != 0.0) {
    throw std::invalid_argument("sr_nonuniform: edges must start at 0 and contain at least two values");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("sr_nonuniform: edges must be strictly increasing");
  }
  h = checked_clamp(h, edges.back());
  // Draw only when h is strictly inside a bin, so edge values consume no randomness.
  if (std::binary_search(edges.begin(), edges.end(), h)) return stochastic_round(h, edges, 0.0);
  return stochastic_round(h, edges, rng.uniform());
}

// ---------------------------------------------------------------------------
// Row quantization

GroupMeta quantize_group(std::span<const float> h, std::span<std::uint8_t> codes_out, const QuantScheme& scheme,
                         std::span<const double> edges, SeededRng& rng) {
  if (h.empty()) throw std::invalid_argument("quantize_row: empty input");
  if (codes_out.size() != h.size()) throw std::invalid_argument("quantize_group: output length mismatch");
  const auto [mn, mx] = std::minmax_element(h.begin(), h.end());
  if (!std::isfinite(*mn) || !std::isfinite(*mx)) throw std::invalid_argument("quantize_row: non-finite input");
  GroupMeta meta{*mn, *mx - *mn};
  if (meta.range == 0.0f) {
    std::fill(codes_out.begin(), codes_out.end(), std::uint8_t{0});
    return meta;
  }

  const double levels = scheme.levels();
  const double z = meta.zero_point;
  const double scale = levels / (static_cast<double>(*mx) - z);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double normalized = std::clamp((h[i] - z) * scale, 0.0, levels);
    if (scheme.uniform()) {
      codes_out[i] = static_cast<std::uint8_t>(sr_uniform(normalized, scheme.levels(), rng));
    } else {
      codes_out[i] = static_cast<std::uint8_t>(stochastic_round(normalized, edges, rng.uniform()));
    }
  }
  return meta;
}

QuantizedGroup quantize_row(std::span<const float> h, const QuantScheme& scheme, SeededRng& rng) {
  QuantizedGroup out;
  out.codes.resize(h.size(), 0);
  const auto edges = scheme.full_edges();
  const GroupMeta meta = quantize_group(h, out.codes, scheme, edges, rng);
  out.zero_point = meta.zero_point;
  out.range = meta.range;
  return out;
}

std::vector<float> dequantize_row(std::span<const std::uint8_t> codes, float zero_point, float range,
                                  const QuantScheme& scheme) {
  std::vector<float> out(codes.size());
  const double levels = scheme.levels();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] > scheme.levels()) throw std::out_of_range("dequantize_row: code exceeds B");
    out[i] = static_cast<float>(static_cast<double>(range) * scheme.edge_value(codes[i]) / levels + zero_point);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bit packing

namespace {

void check_bits(int bits) {
  if (bits != 2 && bits != 4 && bits != 8) throw std::invalid_argument("bit packing: bits must be 2, 4 or 8");
}

}  // namespace

std::vector<std::uint8_t> pack_codes(std::span<const std::uint8_t> codes, int bits) {
  check_bits(bits);
  const std::size_t per_byte = 8 / bits;
  const unsigned limit = 1u << bits;
  std::vector<std::uint8_t> out((codes.size() * bits + 7) / 8, 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= limit) {
      throw std::out_of_range("pack_codes: code " + std::to_string(codes[i]) + " does not fit in " +
                              std::to_string(bits) + " bits");
    }
    out[i / per_byte] |= static_cast<std::uint8_t>(codes[i] << ((i % per_byte) * bits));
  }
  return out;
}

std::vector<std::uint8_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits, std::size_t count) {
  check_bits(bits);
  if (bytes.size() * 8 < count * bits) throw std::invalid_argument("unpack_codes: not enough bytes");
  const std::size_t per_byte = 8 / bits;
  const unsigned mask = (1u << bits) - 1u;
  std::vector<std::uint8_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<std::uint8_t>((bytes[i / per_byte] >> ((i % per_byte) * bits)) & mask);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PackedQuantTensor

PackedQuantTensor::PackedQuantTensor(QuantScheme scheme, std::size_t rows, std::size_t cols,
                                     std::vector<std::uint8_t> packed, std::vector<GroupMeta> meta)
    : scheme_(std::move(scheme)), rows_(rows), cols_(cols), packed_(std::move(packed)), meta_(std::move(meta)) {
  if (meta_.size() != scheme_.group_count(rows_, cols_)) {
    throw std::invalid_argument("PackedQuantTensor: group metadata count does not match shape");
  }
  if (packed_.size() != (rows_ * cols_ * scheme_.bits() + 7) / 8) {
    throw std::invalid_argument("PackedQuantTensor: packed code length does not match shape");
  }
  for (const auto& g : meta_) {
    if (!(g.range >= 0.0f)) throw std::invalid_argument("PackedQuantTensor: negative group range");
  }
}

std::vector<std::uint8_t> PackedQuantTensor::codes() const {
  return unpack_codes(packed_, scheme_.bits(), element_count());
}

std::size_t PackedQuantTensor::group_of(std::size_t index) const {
  return scheme_.grouping() == Grouping::kPerRow ? index / cols_ : index / scheme_.block_size();
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

 private:
  std::uint64_t take(int n) {
    if (remaining() < static_cast<std::size_t>(n)) throw std::invalid_argument("PackedQuantTensor: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffULL) throw std::length_error(std::string("PackedQuantTensor: ") + what + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::size_t PackedQuantTensor::serialized_size() const {
  const std::size_t edge_bytes = scheme_.uniform() ? 0 : scheme_.inner_edges().size() * 8;
  return kHeaderBytes + edge_bytes + meta_.size() * 8 + packed_.size();
}

std::vector<std::uint8_t> PackedQuantTensor::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size());
  out.insert(out.end(), {'A', 'Q', 'T', '1'});
  std::uint32_t mode = static_cast<std::uint32_t>(scheme_.grouping());
  if (!scheme_.uniform()) mode |= kExplicitEdgesFlag;
  put_u32(out, static_cast<std::uint32_t>(scheme_.bits()));
  put_u32(out, mode);
  put_u32(out, narrow_u32(scheme_.block_size(), "block size"));
  put_u32(out, narrow_u32(rows_, "rows"));
  put_u32(out, narrow_u32(cols_, "cols"));
  put_u32(out, narrow_u32(meta_.size(), "group count"));
  for (double e : scheme_.inner_edges()) put_u64(out, std::bit_cast<std::uint64_t>(e));
  for (const auto& g : meta_) {
    put_u32(out, std::bit_cast<std::uint32_t>(g.zero_point));
    put_u32(out, std::bit_cast<std::uint32_t>(g.range));
  }
  out.insert(out.end(), packed_.begin(), packed_.end());
  return out;
}

PackedQuantTensor PackedQuantTensor::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), "AQT1", 4) != 0) {
    throw std::invalid_argument("PackedQuantTensor: bad magic");
  }
  Reader in(bytes.subspan(4));
  const auto bits = static_cast<int>(in.u32());
  const std::uint32_t mode = in.u32();
  const std::uint32_t g = in.u32();
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  const std::uint32_t groups = in.u32();

  const std::uint32_t grouping = mode & ~kExplicitEdgesFlag;
  if (grouping > 1) throw std::invalid_argument("PackedQuantTensor: unknown grouping mode");
  QuantScheme scheme = grouping == 0 ? QuantScheme::per_row(bits) : QuantScheme::block(bits, g);
  if (mode & kExplicitEdgesFlag) {
    std::vector<double> inner(scheme.levels() - 1);
    for (auto& e : inner) e = in.f64();
    scheme = scheme.with_edges(std::move(inner));
  }
  if (groups != scheme.group_count(rows, cols)) throw std::invalid_argument("PackedQuantTensor: group count mismatch");
  std::vector<GroupMeta> meta(groups);
  for (auto& m : meta) {
    m.zero_point = in.f32();
    m.range = in.f32();
  }
  const std::size_t code_bytes = (static_cast<std::size_t>(rows) * cols * bits + 7) / 8;
  if (in.remaining() != code_bytes) throw std::invalid_argument("PackedQuantTensor: code payload length mismatch");
  auto rest = in.rest();
  std::vector<std::uint8_t> packed(rest.begin(), rest.end());
  for (auto c : unpack_codes(packed, bits, static_cast<std::size_t>(rows) * cols)) {
    if (c > scheme.levels()) throw std::invalid_argument("PackedQuantTensor: code exceeds B");
  }
  return PackedQuantTensor(std::move(scheme), rows, cols, std::move(packed), std::move(meta));
}

}  // namespace actcomp
