#include "actcomp/gnn.hpp"
#include "actcomp/blockwise.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace actcomp {

namespace {

struct Propagated {
  DenseMatrix pre_activation;
  DenseMatrix output;
};

Propagated propagate(const GnnLayer& layer, const SparseAdjacency& a_hat, const DenseMatrix& h_in) {
  if (h_in.cols() != layer.in_dim()) {
    throw std::invalid_argument("GnnLayer: input has " + std::to_string(h_in.cols()) + " columns, layer expects " +
                                std::to_string(layer.in_dim()));
  }
  Propagated p;
  p.pre_activation = matmul(spmm(a_hat, h_in), layer.theta);
  p.output = p.pre_activation;
  if (layer.relu)
    for (auto& v : p.output.values()) v = std::max(v, 0.0f);
  return p;
}

std::vector<std::uint8_t> pack_mask(const DenseMatrix& pre) {
  std::vector<std::uint8_t> mask((pre.size() + 7) / 8, 0);
  const auto v = pre.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > 0.0f) mask[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return mask;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

// ---------------------------------------------------------------------------
// LayerContext

std::vector<std::uint8_t> LayerContext::serialize() const {
  std::vector<std::uint8_t> out;
  if (const auto* packed = std::get_if<PackedQuantTensor>(&saved)) {
    out = packed->serialize();
  } else {
    const auto& dense = std::get<DenseMatrix>(saved);
    put_u32(out, static_cast<std::uint32_t>(dense.rows()));
    put_u32(out, static_cast<std::uint32_t>(dense.cols()));
    for (float v : dense.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (projector) {
    const std::uint64_t seed = projector->seed();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
  }
  out.insert(out.end(), relu_mask.begin(), relu_mask.end());
  return out;
}

std::uint64_t LayerContext::storage_bits() const {
  std::uint64_t bytes = 0;
  if (const auto* packed = std::get_if<PackedQuantTensor>(&saved)) {
    bytes = packed->serialized_size();
  } else {
    bytes = 8 + 4 * std::get<DenseMatrix>(saved).size();
  }
  if (projector) bytes += 8;
  bytes += relu_mask.size();
  return 8 * bytes;
}

std::uint64_t LayerContext::fp32_storage_bits(std::size_t rows, std::size_t in_dim, std::size_t out_dim, bool relu) {
  const std::uint64_t mask_bytes = relu ? (static_cast<std::uint64_t>(rows) * out_dim + 7) / 8 : 0;
  return 8 * (8 + 4 * static_cast<std::uint64_t>(rows) * in_dim + mask_bytes);
}

// ---------------------------------------------------------------------------
// Forward / backward

ForwardResult forward(const GnnLayer& layer, const SparseAdjacency& a_hat, const DenseMatrix& h_in, SeededRng& rng) {
  if (layer.projector && layer.projector->d_in() != layer.in_dim()) {
    throw std::invalid_argument("forward: projector input width does not match the layer");
  }
  auto p = propagate(layer, a_hat, h_in);
  ForwardResult result{std::move(p.output), {}};
  LayerContext& ctx = result.context;
  ctx.rows = h_in.rows();
  ctx.in_dim = layer.in_dim();
  ctx.out_dim = layer.out_dim();
  ctx.projector = layer.projector;
  if (layer.relu) ctx.relu_mask = pack_mask(p.pre_activation);

  DenseMatrix kept = layer.projector ? project(h_in, *layer.projector) : h_in;
  if (layer.scheme) {
    ctx.saved = quantize(kept, *layer.scheme, rng);
  } else {
    ctx.saved = std::move(kept);
  }
  return result;
}

DenseMatrix recover_input(const LayerContext& ctx) {
  DenseMatrix stored = std::holds_alternative<PackedQuantTensor>(ctx.saved)
                           ? dequantize(std::get<PackedQuantTensor>(ctx.saved))
                           : std::get<DenseMatrix>(ctx.saved);
  if (ctx.projector) return recover(stored, *ctx.projector);
  return stored;
}

LayerGradients backward(const GnnLayer& layer, const SparseAdjacency& a_hat, const LayerContext& ctx,
                        const DenseMatrix& grad_out) {
  if (ctx.in_dim != layer.in_dim() || ctx.out_dim != layer.out_dim()) {
    throw std::invalid_argument("backward: context was produced by a different layer shape");
  }
  if (grad_out.rows() != ctx.rows || grad_out.cols() != ctx.out_dim) {
    throw std::invalid_argument("backward: gradient shape does not match the layer output");
  }
  if (layer.relu && ctx.relu_mask.empty()) throw std::invalid_argument("backward: context lacks the ReLU mask");

  DenseMatrix g = grad_out;
  if (layer.relu) {
    auto v = g.values();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!((ctx.relu_mask[i / 8] >> (i % 8)) & 1u)) v[i] = 0.0f;
  }
  const DenseMatrix h_hat = recover_input(ctx);
  LayerGradients out;
  out.grad_theta = matmul_tn(spmm(a_hat, h_hat), g);
  out.grad_input = spmm_transposed(a_hat, matmul_nt(g, layer.theta));
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(Precision p) {
  switch (p) {
    case Precision::kFp32: return "fp32";
    case Precision::kInt8: return "int8";
    case Precision::kInt4: return "int4";
    case Precision::kInt2: return "int2";
  }
  return "?";
}

Precision parse_precision(const std::string& s) {
  if (s == "fp32") return Precision::kFp32;
  if (s == "int8") return Precision::kInt8;
  if (s == "int4") return Precision::kInt4;
  if (s == "int2") return Precision::kInt2;
  throw std::invalid_argument("unknown precision '" + s + "' (expected fp32, int8, int4 or int2)");
}

int precision_bits(Precision p) {
  switch (p) {
    case Precision::kFp32: return 32;
    case Precision::kInt8: return 8;
    case Precision::kInt4: return 4;
    case Precision::kInt2: return 2;
  }
  return 32;
}

namespace {

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer, std::uint64_t purpose) {
  return SeededRng(seed).substream(purpose * 1024 + layer).next_u64();
}

constexpr std::uint64_t kWeightStream = 1;
constexpr std::uint64_t kProjectorStream = 2;
constexpr std::uint64_t kStepStream = 3;

std::vector<double> int2_edges_for(std::size_t r_dim, const BoundaryTable* table) {
  if (table && r_dim >= BoundaryTable::kMinD && r_dim <= BoundaryTable::kMaxD) {
    const auto& e = table->lookup(static_cast<std::uint32_t>(r_dim));
    return {e.alpha, e.beta};
  }
  if (r_dim < 3) throw std::invalid_argument("variance minimization needs a projected width of at least 3");
  const auto opt = optimize_boundaries(ClippedNormal(2, static_cast<double>(r_dim)));
  return {opt.alpha, opt.beta};
}

}  // namespace

std::vector<GnnLayer> build_model(const TrainConfig& config, std::size_t in_features, int classes,
                                  const BoundaryTable* table) {
  if (config.layers == 0) throw std::invalid_argument("build_model: need at least one layer");
  if (classes < 2) throw std::invalid_argument("build_model: need at least two classes");
  if (config.d_over_r == 0) throw std::invalid_argument("build_model: D/R must be at least 1");
  const bool compress = config.precision != Precision::kFp32;
  if (config.variance_minimized && config.precision != Precision::kInt2) {
    throw std::invalid_argument("build_model: variance minimization is defined for INT2 only");
  }

  std::vector<GnnLayer> layers;
  std::size_t in_dim = in_features;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const bool last = l + 1 == config.layers;
    const std::size_t out_dim = last ? static_cast<std::size_t>(classes) : config.hidden;
    GnnLayer layer;
    layer.relu = !last;
    layer.theta = DenseMatrix(in_dim, out_dim);
    SeededRng wrng(layer_seed(config.seed, l, kWeightStream));
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (auto& w : layer.theta.values()) w = static_cast<float>(wrng.uniform(-limit, limit));

    if (compress) {
      std::size_t r_dim = in_dim;
      if (config.d_over_r > 1) {
        layer.projector = RademacherProjector::from_ratio(in_dim, config.d_over_r, layer_seed(config.seed, l, kProjectorStream));
        r_dim = layer.projector->d_out();
      }
      const int bits = precision_bits(config.precision);
      QuantScheme scheme = config.g_over_r == 0 ? QuantScheme::per_row(bits) : QuantScheme::block(bits, config.g_over_r * r_dim);
      if (config.variance_minimized) scheme = scheme.with_edges(int2_edges_for(r_dim, table));
      layer.scheme = std::move(scheme);
    }
    layers.push_back(std::move(layer));
    in_dim = out_dim;
  }
  return layers;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;
};

// Mean softmax cross-entropy over `nodes`; gradient is zero on other rows.
LossResult cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& nodes) {
  LossResult r;
  r.grad = DenseMatrix(logits.rows(), logits.cols());
  if (nodes.empty()) return r;
  const double scale = 1.0 / static_cast<double>(nodes.size());
  std::vector<double> p(logits.cols());
  for (std::size_t i : nodes) {
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) sum += p[c] = std::exp(static_cast<double>(row[c]) - mx);
    for (std::size_t c = 0; c < row.size(); ++c) {
      p[c] /= sum;
      r.grad(i, c) = static_cast<float>((p[c] - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0)) * scale);
    }
    r.loss -= std::log(std::max(p[labels[i]], std::numeric_limits<double>::min())) * scale;
  }
  return r;
}

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i : nodes) {
    const auto row = logits.row(i);
    const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (pred == labels[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

DenseMatrix normalize_rows(const DenseMatrix& h, const std::vector<std::size_t>& rows, double levels) {
  DenseMatrix out(rows.size(), h.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = h.row(rows[k]);
    const auto [mn, mx] = std::minmax_element(src.begin(), src.end());
    const double range = static_cast<double>(*mx) - *mn;
    auto dst = out.row(k);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = range > 0.0 ? static_cast<float>(std::clamp((src[j] - *mn) / range * levels, 0.0, levels)) : 0.0f;
    }
  }
  return out;
}

}  // namespace

TrainReport train(const GraphDataset& data, const TrainConfig& config, const TrainOptions& options) {
  data.validate();
  if (config.epochs == 0) throw std::invalid_argument("train: epochs must be positive");
  const SparseAdjacency a_hat =
      config.aggregator == Aggregator::kGcn ? normalize_adjacency(data.adjacency) : mean_adjacency(data.adjacency);
  std::vector<GnnLayer> layers = build_model(config, data.features.cols(), data.num_classes(), options.table);

  const auto train_nodes = data.nodes_in(Split::kTrain);
  const auto val_nodes = data.nodes_in(Split::kVal);
  const auto test_nodes = data.nodes_in(Split::kTest);
  if (train_nodes.empty()) throw std::invalid_argument("train: no training nodes");

  TrainReport report;
  report.config = config;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    report.fp32_activation_bits +=
        LayerContext::fp32_storage_bits(data.nodes(), layer.in_dim(), layer.out_dim(), layer.relu);
    report.layer_projected_dims.push_back(layer.projector ? layer.projector->d_out() : layer.in_dim());
  }

  const int capture_bits = config.precision == Precision::kFp32 ? 2 : precision_bits(config.precision);
  const double capture_levels = (1u << capture_bits) - 1u;
  std::vector<RademacherProjector> capture_projectors;
  if (options.capture_activations) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      capture_projectors.push_back(RademacherProjector::from_ratio(layers[l].in_dim(), config.d_over_r,
                                                                   layer_seed(config.seed, l, kProjectorStream)));
    }
  }

  const SeededRng step_root(layer_seed(config.seed, 0, kStepStream));
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const SeededRng step_rng = step_root.substream(epoch);

    std::vector<LayerContext> contexts;
    contexts.reserve(layers.size());
    DenseMatrix h = data.features;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      SeededRng lane = step_rng.substream(l);
      auto fr = forward(layers[l], a_hat, h, lane);
      contexts.push_back(std::move(fr.context));
      h = std::move(fr.output);
    }
    auto loss = cross_entropy(h, data.labels, train_nodes);
    if (!std::isfinite(loss.loss)) {
      throw std::runtime_error("train: loss diverged (non-finite) at epoch " + std::to_string(epoch));
    }
    report.epoch_loss.push_back(loss.loss);
    if (epoch == 0) {
      for (const auto& ctx : contexts) {
        report.layer_activation_bits.push_back(ctx.storage_bits());
        report.activation_bits += ctx.storage_bits();
      }
    }

    DenseMatrix grad = std::move(loss.grad);
    for (std::size_t l = layers.size(); l-- > 0;) {
      auto g = backward(layers[l], a_hat, contexts[l], grad);
      auto theta = layers[l].theta.values();
      const auto gt = g.grad_theta.values();
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= static_cast<float>(config.lr) * gt[k];
      grad = std::move(g.grad_input);
    }
    contexts.clear();
    const auto t1 = std::chrono::steady_clock::now();
    report.epoch_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

    // Evaluation pass with the updated weights.
    std::vector<DenseMatrix> inputs;
    DenseMatrix e = data.features;
    for (const auto& layer : layers) {
      if (options.capture_activations) inputs.push_back(e);
      e = propagate(layer, a_hat, e).output;
    }
    const double val_loss = val_nodes.empty() ? cross_entropy(e, data.labels, train_nodes).loss
                                              : cross_entropy(e, data.labels, val_nodes).loss;
    report.val_loss.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      report.best_val_epoch = epoch;
      if (options.capture_activations) {
        CapturedActivations cap;
        cap.epoch = epoch;
        for (std::size_t l = 0; l < layers.size(); ++l) {
          cap.layers.push_back(normalize_rows(project(inputs[l], capture_projectors[l]), test_nodes, capture_levels));
        }
        report.captured = std::move(cap);
      }
    }
    if (epoch + 1 == config.epochs) {
      report.train_accuracy = accuracy(e, data.labels, train_nodes);
      report.val_accuracy = accuracy(e, data.labels, val_nodes);
      report.test_accuracy = accuracy(e, data.labels, test_nodes);
    }
  }
  report.memory_ratio = static_cast<double>(report.activation_bits) / static_cast<double>(report.fp32_activation_bits);
  return report;
}

}  // namespace actcomp
