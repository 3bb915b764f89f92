#include "actcomp/varopt.hpp"
#include "actcomp/core.hpp"
#include "actcomp/quant.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace actcomp {

// ---------------------------------------------------------------------------
// BinEdges

BinEdges::BinEdges(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("BinEdges: need at least two edges");
  if (edges_.front() != 0.0) throw std::invalid_argument("BinEdges: first edge must be 0");
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw std::invalid_argument("BinEdges: edges must be strictly increasing");
  }
}

BinEdges BinEdges::uniform(std::uint32_t levels) {
  std::vector<double> e(levels + 1);
  for (std::uint32_t k = 0; k <= levels; ++k) e[k] = k;
  return BinEdges(std::move(e));
}

BinEdges BinEdges::int2(double alpha, double beta) { return BinEdges({0.0, alpha, beta, 3.0}); }

std::size_t BinEdges::bin_of(double h) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), h);
  if (it == edges_.begin()) return 0;
  if (it == edges_.end()) return bins() - 1;
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

BinEdges BinEdges::mirrored() const {
  std::vector<double> m(edges_.size());
  const double top = levels();
  for (std::size_t i = 0; i < edges_.size(); ++i) m[i] = top - edges_[edges_.size() - 1 - i];
  m.front() = 0.0;
  m.back() = top;
  return BinEdges(std::move(m));
}

double sr_variance(double h, const BinEdges& edges) {
  const auto e = edges.values();
  const std::size_t i = edges.bin_of(h);
  const double lo = e[i];
  const double width = e[i + 1] - lo;
  const double offset = h - lo;
  return std::max(0.0, width * offset - offset * offset);
}

// ---------------------------------------------------------------------------
// Expected variance

double expected_variance(const BinEdges& edges, const ClippedNormal& dist) {
  if (edges.levels() != dist.levels()) {
    throw std::invalid_argument("expected_variance: grid top does not match the distribution's B");
  }
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto e = edges.values();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    const double lo = e[i];
    const double width = e[i + 1] - lo;
    auto integrand = [&](double h) {
      const double offset = h - lo;
      return (width * offset - offset * offset) * cn_pdf(h, dist);
    };
    double error = 0.0;
    const double value = Integrator::integrate(integrand, lo, e[i + 1], 20, 1e-13, &error);
    if (!(error <= kQuadratureTolerance) || !std::isfinite(value)) {
      throw QuadratureError("expected_variance: quadrature did not converge on bin " + std::to_string(i) +
                            " (error estimate " + std::to_string(error) + ")");
    }
    total += value;
  }
  return total;
}

double expected_variance(double alpha, double beta, const ClippedNormal& dist) {
  if (dist.bits() != 2) throw std::invalid_argument("expected_variance: INT2 boundaries need a 2-bit distribution");
  return expected_variance(BinEdges::int2(alpha, beta), dist);
}

// ---------------------------------------------------------------------------
// Optimization

namespace {

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

constexpr double kAlphaTolerance = 1e-6;
constexpr double kBoundaryMargin = 1e-4;

}  // namespace

BoundaryOptimum optimize_boundaries(const ClippedNormal& dist) {
  if (dist.bits() != 2) throw std::invalid_argument("optimize_boundaries: only INT2 is supported");
  const double top = dist.levels();
  const double mid = top / 2.0;
  auto symmetric = [&](double alpha) { return expected_variance(alpha, top - alpha, dist); };
  auto full = [&](double alpha, double beta) {
    if (!(alpha > 0.0 && beta > alpha && beta < top)) return std::numeric_limits<double>::infinity();
    return expected_variance(alpha, beta, dist);
  };

  BoundaryOptimum best;
  best.uniform_expected_variance = expected_variance(1.0, 2.0, dist);
  best.alpha = golden_section(symmetric, 0.0, mid, kAlphaTolerance);
  best.beta = top - best.alpha;
  best.expected_variance = symmetric(best.alpha);

  if (best.alpha < kBoundaryMargin || best.alpha > mid - kBoundaryMargin) {
    throw OptimizerError("optimize_boundaries: minimum on the feasible boundary for D = " + std::to_string(dist.d()) +
                         " (alpha = " + std::to_string(best.alpha) + ")");
  }

  // The symmetric line may hide a saddle; probe the full 2-D objective.
  bool improved = false;
  for (double step : {1e-3, 1e-4}) {
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        if (full(best.alpha + dx * step, best.beta + dy * step) < best.expected_variance - 1e-14) improved = true;
      }
    }
  }
  if (improved) {
    double alpha = best.alpha, beta = best.beta;
    for (int round = 0; round < 50; ++round) {
      const double prev_a = alpha, prev_b = beta;
      alpha = golden_section([&](double a) { return full(a, beta); }, 0.0, beta, kAlphaTolerance);
      beta = golden_section([&](double b) { return full(alpha, b); }, alpha, top, kAlphaTolerance);
      if (std::abs(alpha - prev_a) < kAlphaTolerance && std::abs(beta - prev_b) < kAlphaTolerance) break;
    }
    const double value = full(alpha, beta);
    if (value < best.expected_variance) {
      best.alpha = alpha;
      best.beta = beta;
      best.expected_variance = value;
      best.refined = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// BoundaryTable

BoundaryTable::BoundaryTable(std::vector<BoundaryEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kMaxD - kMinD + 1) {
    throw std::invalid_argument("BoundaryTable: expected " + std::to_string(kMaxD - kMinD + 1) + " entries, got " +
                                std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].d != kMinD + i) throw std::invalid_argument("BoundaryTable: entries must cover every D in order");
  }
}

BoundaryTable BoundaryTable::build() {
  const std::size_t count = kMaxD - kMinD + 1;
  std::vector<BoundaryEntry> entries(count);
  std::mutex failure_mutex;
  std::string failure;
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto d = static_cast<std::uint32_t>(kMinD + i);
      try {
        const auto opt = optimize_boundaries(ClippedNormal(2, d));
        entries[i] = {d, opt.alpha, opt.beta, opt.expected_variance};
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (failure.empty()) failure = "BoundaryTable::build failed at D = " + std::to_string(d) + ": " + e.what();
      }
    }
  });
  if (!failure.empty()) throw OptimizerError(failure);
  return BoundaryTable(std::move(entries));
}

const BoundaryEntry& BoundaryTable::lookup(std::uint32_t d) const {
  if (d < kMinD || d > kMaxD) {
    throw std::out_of_range("BoundaryTable: D = " + std::to_string(d) + " outside [" + std::to_string(kMinD) + ", " +
                            std::to_string(kMaxD) + "]");
  }
  return entries_[d - kMinD];
}

void BoundaryTable::write_csv(std::ostream& out) const {
  out << "# actcomp INT2 boundary table, generator v" << kGeneratorVersion << "\n";
  out << "D,alpha,beta,expected_variance\n";
  char line[128];
  for (const auto& e : entries_) {
    std::snprintf(line, sizeof(line), "%u,%.17g,%.17g,%.17g\n", e.d, e.alpha, e.beta, e.expected_variance);
    out << line;
  }
}

BoundaryTable BoundaryTable::read_csv(std::istream& in) {
  std::vector<BoundaryEntry> entries;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "D,alpha,beta,expected_variance") throw std::invalid_argument("BoundaryTable: unexpected header");
      header_seen = true;
      continue;
    }
    BoundaryEntry e;
    std::istringstream row(line);
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> e.d >> c1 >> e.alpha >> c2 >> e.beta >> c3 >> e.expected_variance) || c1 != ',' || c2 != ',' ||
        c3 != ',') {
      throw std::invalid_argument("BoundaryTable: malformed row: " + line);
    }
    entries.push_back(e);
  }
  return BoundaryTable(std::move(entries));
}

BoundaryTable BoundaryTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("BoundaryTable: cannot open " + path);
  return read_csv(in);
}

void BoundaryTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("BoundaryTable: cannot write " + path);
  write_csv(out);
}

// ---------------------------------------------------------------------------
// Variance reduction

std::optional<double> variance_reduction(std::span<const double> normalized, const BinEdges& optimized, SeededRng& rng,
                                         std::size_t draws) {
  const auto levels = static_cast<std::uint32_t>(std::lround(optimized.levels()));
  const BinEdges baseline = BinEdges::uniform(levels);
  const auto base_edges = baseline.values();
  const auto opt_edges = optimized.values();
  for (double h : normalized) {
    if (!(h >= -kNormalizedSlack && h <= levels + kNormalizedSlack)) {
      throw std::invalid_argument("variance_reduction: value outside [0, B]");
    }
  }

  double err_opt = 0.0;
  double err_base = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    for (double h : normalized) {
      const double u = rng.uniform();
      const double base = base_edges[stochastic_round(h, base_edges, u)];
      const double opt = opt_edges[stochastic_round(h, opt_edges, u)];
      err_base += (h - base) * (h - base);
      err_opt += (h - opt) * (h - opt);
    }
  }
  if (err_base == 0.0) return std::nullopt;
  return 1.0 - err_opt / err_base;
}

std::vector<ReductionPoint> reduction_curve(std::span<const double> normalized, const BoundaryTable& table,
                                            std::uint32_t d_lo, std::uint32_t d_hi, const SeededRng& rng,
                                            std::size_t draws) {
  d_lo = std::max(d_lo, BoundaryTable::kMinD);
  d_hi = std::min(d_hi, BoundaryTable::kMaxD);
  if (d_lo > d_hi) throw std::invalid_argument("reduction_curve: empty D range");
  std::vector<ReductionPoint> curve(d_hi - d_lo + 1);
  parallel_for(curve.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& entry = table.lookup(static_cast<std::uint32_t>(d_lo + i));
      SeededRng shared = rng;
      const auto r = variance_reduction(normalized, BinEdges::int2(entry.alpha, entry.beta), shared, draws);
      curve[i] = {entry.d, r.value_or(0.0)};
    }
  });
  return curve;
}

}  // namespace actcomp
