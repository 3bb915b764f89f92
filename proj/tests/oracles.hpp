#pragma once

// Reference computations used by the unit and acceptance tests. They share no
// code with the library beyond plain data types.

#include "actcomp/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace actcomp::oracle {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// sigma of CN_[1/D] for B = 3 via bisection on normal_cdf.
inline double cn_sigma(double d) {
  double lo = -40.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < 1.0 / d ? lo : hi) = mid;
  }
  return -1.5 / (0.5 * (lo + hi));
}

/// Containing-bin SR variance on an explicit INT2 grid {0, a, b, 3}.
inline double sr_var(double h, double a, double b) {
  double lo = 0.0, hi = a;
  if (h >= b) {
    lo = b;
    hi = 3.0;
  } else if (h >= a) {
    lo = a;
    hi = b;
  }
  return std::max(0.0, (hi - lo) * (h - lo) - (h - lo) * (h - lo));
}

/// Fixed-grid trapezoid of sr_var * density over (0, 3); the clamp atoms sit
/// on edges and add nothing.
inline double trapezoid_ev(double a, double b, double d, std::size_t points = 100000) {
  const double mu = 1.5, sigma = cn_sigma(d);
  const double step = 3.0 / static_cast<double>(points - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double h = static_cast<double>(i) * step;
    const double w = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    sum += w * sr_var(h, a, b) * normal_pdf((h - mu) / sigma) / sigma;
  }
  return sum * step;
}

/// Brute-force search of EV(alpha, beta) over a regular grid, using the
/// closed-form partial moments of the normal density:
///   int_x^y p = dPhi,  int_x^y h p = mu dPhi - sigma dphi,
///   int_x^y h^2 p = (mu^2 + sigma^2) dPhi - sigma [(y + mu) phi(y) - (x + mu) phi(x)].
class GridSearch {
 public:
  GridSearch(double d, double step) : step_(step), n_(static_cast<std::size_t>(std::llround(3.0 / step))) {
    const double mu = 1.5, sigma = cn_sigma(d);
    m0_.resize(n_ + 1);
    m1_.resize(n_ + 1);
    m2_.resize(n_ + 1);
    const double z0 = -mu / sigma;
    for (std::size_t k = 0; k <= n_; ++k) {
      const double x = static_cast<double>(k) * step;
      const double z = (x - mu) / sigma;
      const double dphi = normal_cdf(z) - normal_cdf(z0);
      const double dpdf = normal_pdf(z) - normal_pdf(z0);
      m0_[k] = dphi;
      m1_[k] = mu * dphi - sigma * dpdf;
      m2_[k] = (mu * mu + sigma * sigma) * dphi - sigma * ((x + mu) * normal_pdf(z) - (0.0 + mu) * normal_pdf(z0));
    }
  }

  /// EV with edges at grid indices i < j.
  double ev(std::size_t i, std::size_t j) const { return bin(0, i) + bin(i, j) + bin(j, n_); }

  struct Result {
    double alpha;
    double beta;
    double ev;
  };

  Result minimize() const {
    Result best{0, 0, 1e300};
    for (std::size_t i = 1; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = ev(i, j);
        if (v < best.ev) best = {static_cast<double>(i) * step_, static_cast<double>(j) * step_, v};
      }
    }
    return best;
  }

 private:
  double bin(std::size_t lo, std::size_t hi) const {
    const double a = static_cast<double>(lo) * step_, c = static_cast<double>(hi) * step_;
    const double p0 = m0_[hi] - m0_[lo], p1 = m1_[hi] - m1_[lo], p2 = m2_[hi] - m2_[lo];
    return -p2 + (a + c) * p1 - a * c * p0;
  }

  double step_;
  std::size_t n_;
  std::vector<double> m0_, m1_, m2_;
};

// Dense double-precision GNN layer, for gradient checks.

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const DenseMatrix& m) {
  Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

inline Dense to_dense(const SparseAdjacency& a) {
  Dense d(a.n, std::vector<double>(a.n, 0.0));
  for (std::size_t k = 0; k < a.edges.size(); ++k) d[a.edges[k].src][a.edges[k].dst] += a.values[k];
  return d;
}

inline Dense mul(const Dense& a, const Dense& b) {
  Dense c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Double-precision reference of act(A H Theta).
inline Dense reference_forward(const Dense& a, const Dense& h, const Dense& theta, bool relu) {
  auto z = mul(mul(a, h), theta);
  if (relu)
    for (auto& row : z)
      for (auto& v : row) v = std::max(v, 0.0);
  return z;
}

inline double weighted_sum(const Dense& out, const DenseMatrix& w) {
  double s = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) s += out[i][j] * w(i, j);
  return s;
}

struct FdCheck {
  double theta_rel_error;
  double input_rel_error;
};

/// Central differences of sum(act(A H Theta) * w) in double precision against
/// analytic gradients; errors are max-abs over max-abs of the reference.
inline FdCheck finite_difference_check(const SparseAdjacency& a_hat, const DenseMatrix& h_in,
                                       const DenseMatrix& theta_in, bool relu, const DenseMatrix& w,
                                       const DenseMatrix& grad_theta, const DenseMatrix& grad_input,
                                       double eps = 1e-6) {
  const auto a = to_dense(a_hat);
  const auto h = to_dense(h_in);
  const auto theta = to_dense(theta_in);
  auto rel = [&](Dense x, const DenseMatrix& grad, bool wrt_theta) {
    double max_err = 0, max_ref = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x[0].size(); ++j) {
        const double keep = x[i][j];
        x[i][j] = keep + eps;
        const double up = weighted_sum(wrt_theta ? reference_forward(a, h, x, relu) : reference_forward(a, x, theta, relu), w);
        x[i][j] = keep - eps;
        const double down =
            weighted_sum(wrt_theta ? reference_forward(a, h, x, relu) : reference_forward(a, x, theta, relu), w);
        x[i][j] = keep;
        const double fd = (up - down) / (2 * eps);
        max_err = std::max(max_err, std::abs(fd - grad(i, j)));
        max_ref = std::max(max_ref, std::abs(fd));
      }
    }
    return max_err / max_ref;
  };
  return {rel(theta, grad_theta, true), rel(h, grad_input, false)};
}

}  // namespace actcomp::oracle
