#pragma once

#include "actcomp/core.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace actcomp {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(Split s);

/// Node-classification graph as read from a dataset directory:
///   edges.csv     one "src,dst" pair per line, zero-indexed, undirected
///   features.csv  N rows of F comma-separated reals
///   labels.csv    one integer class per line
///   splits.csv    one of train/val/test per line
struct GraphDataset {
  SparseAdjacency adjacency;
  DenseMatrix features;
  std::vector<int> labels;
  std::vector<Split> splits;

  std::size_t nodes() const { return labels.size(); }
  int num_classes() const;
  std::vector<std::size_t> nodes_in(Split s) const;
  void validate() const;
};

/// Reads a dataset directory. Each undirected edge may be listed once or in
/// both directions; the adjacency is symmetrized and deduplicated.
GraphDataset load_graph_dir(const std::filesystem::path& dir);
void save_graph_dir(const GraphDataset& data, const std::filesystem::path& dir);

struct SyntheticGraphConfig {
  std::size_t nodes = 200;
  std::size_t features = 128;
  double p_in = 0.05;
  double p_out = 0.005;
  /// Per-dimension magnitude of the community mean shift (noise sd is 1).
  double feature_shift = 0.15;
};

/// Two-community stochastic block model with community-informative Gaussian
/// features and a 60/20/20 random split. The default config is `synth200`.
GraphDataset make_two_community_graph(const SyntheticGraphConfig& config, std::uint64_t seed);

}  // namespace actcomp
