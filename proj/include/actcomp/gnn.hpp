#pragma once

#include "actcomp/core.hpp"
#include "actcomp/dataset.hpp"
#include "actcomp/projection.hpp"
#include "actcomp/quant.hpp"
#include "actcomp/rng.hpp"
#include "actcomp/varopt.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace actcomp {

enum class Aggregator {
  kGcn,       ///< D^{-1/2} (A + I) D^{-1/2}
  kSageMean,  ///< D^{-1} (A + I)
};

/// One propagation layer out = act(A_hat * H * Theta).
///
/// `projector` and `scheme` control what the layer keeps for backward:
/// neither means the exact FP32 input; a projector alone keeps H * R in
/// FP32; a scheme keeps Quant(H) or Quant(H * R).
struct GnnLayer {
  DenseMatrix theta;
  bool relu = true;
  std::optional<RademacherProjector> projector;
  std::optional<QuantScheme> scheme;

  std::size_t in_dim() const { return theta.rows(); }
  std::size_t out_dim() const { return theta.cols(); }
  bool compressed() const { return projector.has_value() || scheme.has_value(); }
};

/// State saved by forward() for backward().
struct LayerContext {
  std::variant<DenseMatrix, PackedQuantTensor> saved;
  std::optional<RademacherProjector> projector;
  /// ReLU mask, one bit per output entry, packed LSB first. Empty for
  /// layers without an activation.
  std::vector<std::uint8_t> relu_mask;
  std::size_t rows = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;

  /// Byte image of everything held for backward:
  ///   payload | projector seed (u64, if any) | ReLU mask bytes
  /// where the payload is the PackedQuantTensor container, or for dense
  /// state rows and cols (u32) followed by the f32 values.
  std::vector<std::uint8_t> serialize() const;
  std::uint64_t storage_bits() const;

  /// storage_bits() of the uncompressed context for the same layer shape.
  static std::uint64_t fp32_storage_bits(std::size_t rows, std::size_t in_dim, std::size_t out_dim, bool relu);
};

struct ForwardResult {
  DenseMatrix output;
  LayerContext context;
};

/// The output is computed exactly in FP32 whatever the layer compresses.
ForwardResult forward(const GnnLayer& layer, const SparseAdjacency& a_hat, const DenseMatrix& h_in, SeededRng& rng);

struct LayerGradients {
  DenseMatrix grad_theta;
  DenseMatrix grad_input;
};

/// Rebuilds H_hat from the context (dequantize, then inverse projection) and
/// returns (A_hat H_hat)^T G and A_hat^T G Theta^T, with G = grad_out masked by
/// the ReLU pattern.
LayerGradients backward(const GnnLayer& layer, const SparseAdjacency& a_hat, const LayerContext& ctx,
                        const DenseMatrix& grad_out);

/// The input H_hat that backward() would use.
DenseMatrix recover_input(const LayerContext& ctx);

enum class Precision { kFp32, kInt8, kInt4, kInt2 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& s);
int precision_bits(Precision p);

struct TrainConfig {
  Precision precision = Precision::kFp32;
  /// Ratio of layer input width to projected width; 1 disables projection.
  std::size_t d_over_r = 8;
  /// Block size as a multiple of the projected width; 0 means per-row groups.
  std::size_t g_over_r = 0;
  bool variance_minimized = false;
  std::size_t epochs = 100;
  double lr = 0.2;
  std::uint64_t seed = 42;
  std::size_t hidden = 128;
  std::size_t layers = 2;
  Aggregator aggregator = Aggregator::kGcn;
};

/// Builds the layer stack for a dataset: Glorot-uniform weights, ReLU on all
/// but the last layer, one projector per layer fixed for the whole run.
/// Variance-minimized edges are looked up in `table` by projected width, or
/// optimized on the spot when no table is given.
std::vector<GnnLayer> build_model(const TrainConfig& config, std::size_t in_features, int classes,
                                  const BoundaryTable* table = nullptr);

/// Per-row normalized projected activations (values in [0, B]) of the test
/// nodes, one matrix per layer.
struct CapturedActivations {
  std::size_t epoch = 0;
  std::vector<DenseMatrix> layers;
};

struct TrainReport {
  TrainConfig config;
  std::vector<double> epoch_loss;
  std::vector<double> val_loss;
  std::vector<double> epoch_seconds;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t best_val_epoch = 0;
  std::vector<std::uint64_t> layer_activation_bits;
  std::vector<std::size_t> layer_projected_dims;
  std::uint64_t activation_bits = 0;
  std::uint64_t fp32_activation_bits = 0;
  double memory_ratio = 1.0;
  std::optional<CapturedActivations> captured;
};

struct TrainOptions {
  const BoundaryTable* table = nullptr;
  /// Keep normalized projected test activations from the epoch with the
  /// lowest validation loss.
  bool capture_activations = false;
};

/// Full-batch gradient descent with softmax cross-entropy on the train split.
/// Accuracies are those of the final weights.
/// Throws std::runtime_error if the loss becomes non-finite.
TrainReport train(const GraphDataset& data, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace actcomp
