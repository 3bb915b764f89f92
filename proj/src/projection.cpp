#include "actcomp/projection.hpp"
#include "actcomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace actcomp {

RademacherProjector::RademacherProjector(std::size_t d_in, std::size_t d_out, std::uint64_t seed)
    : d_in_(d_in), d_out_(d_out), seed_(seed), scale_(static_cast<float>(1.0 / std::sqrt(static_cast<double>(d_out)))) {
  if (d_in == 0 || d_out == 0) throw std::invalid_argument("RademacherProjector: dimensions must be positive");
}

RademacherProjector RademacherProjector::from_ratio(std::size_t d_in, std::size_t d_over_r, std::uint64_t seed) {
  if (d_over_r == 0) throw std::invalid_argument("RademacherProjector: D/R must be at least 1");
  return RademacherProjector(d_in, std::max<std::size_t>(1, d_in / d_over_r), seed);
}

std::uint64_t RademacherProjector::sign_word(std::size_t i, std::size_t word) const {
  const std::size_t words_per_row = (d_out_ + 63) / 64;
  return SeededRng::mix(SeededRng::mix(seed_) ^ SeededRng::mix(i * words_per_row + word + 1));
}

float RademacherProjector::entry(std::size_t i, std::size_t j) const {
  if (i >= d_in_ || j >= d_out_) throw std::out_of_range("RademacherProjector::entry: index out of range");
  return ((sign_word(i, j / 64) >> (j % 64)) & 1u) ? scale_ : -scale_;
}

void RademacherProjector::fill_row(std::size_t i, float* out) const {
  for (std::size_t w = 0; w * 64 < d_out_; ++w) {
    const std::uint64_t bits = sign_word(i, w);
    const std::size_t end = std::min(d_out_, (w + 1) * 64);
    for (std::size_t j = w * 64; j < end; ++j) out[j] = ((bits >> (j % 64)) & 1u) ? scale_ : -scale_;
  }
}

DenseMatrix RademacherProjector::realize() const {
  DenseMatrix r(d_in_, d_out_);
  for (std::size_t i = 0; i < d_in_; ++i) fill_row(i, r.row(i).data());
  return r;
}

DenseMatrix project(const DenseMatrix& h, const RademacherProjector& p) {
  if (h.cols() != p.d_in()) {
    throw std::invalid_argument("project: H has " + std::to_string(h.cols()) + " columns, projector expects " +
                                std::to_string(p.d_in()));
  }
  DenseMatrix out(h.rows(), p.d_out());
  parallel_for(h.rows(), [&](std::size_t begin, std::size_t end) {
    std::vector<float> r_row(p.d_out());
    for (std::size_t i = 0; i < p.d_in(); ++i) {
      p.fill_row(i, r_row.data());
      for (std::size_t n = begin; n < end; ++n) {
        const float hv = h(n, i);
        if (hv == 0.0f) continue;
        auto dst = out.row(n);
        for (std::size_t j = 0; j < r_row.size(); ++j) dst[j] += hv * r_row[j];
      }
    }
  });
  return out;
}

DenseMatrix recover(const DenseMatrix& h_proj, const RademacherProjector& p) {
  if (h_proj.cols() != p.d_out()) {
    throw std::invalid_argument("recover: H_proj has " + std::to_string(h_proj.cols()) +
                                " columns, projector expects " + std::to_string(p.d_out()));
  }
  DenseMatrix out(h_proj.rows(), p.d_in());
  parallel_for(h_proj.rows(), [&](std::size_t begin, std::size_t end) {
    std::vector<float> r_row(p.d_out());
    for (std::size_t i = 0; i < p.d_in(); ++i) {
      p.fill_row(i, r_row.data());
      for (std::size_t n = begin; n < end; ++n) {
        auto src = h_proj.row(n);
        float acc = 0.0f;
        for (std::size_t j = 0; j < r_row.size(); ++j) acc += src[j] * r_row[j];
        out(n, i) = acc;
      }
    }
  });
  return out;
}

}  // namespace actcomp
