#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edagcn/adjacency.hpp"
#include "edagcn/data.hpp"
#include "edagcn/graph.hpp"

namespace edagcn {

enum class NoiseTarget { features, adjacency };

struct NoiseConfig {
  double snr = 1.0;  // linear: mean-square signal over noise variance
  std::uint64_t seed = 0;
  NoiseTarget target = NoiseTarget::features;
};

/// Real symmetric adjacency with zero diagonal.
struct WeightedGraph {
  RowMatrix weights;

  std::size_t n_nodes() const { return static_cast<std::size_t>(weights.rows()); }
  static WeightedGraph from_graph(const Graph& g);
  SparseMatrix to_sparse() const;
};

/// g plus `count` distinct non-edges drawn uniformly. Throws ValidationError
/// when fewer than `count` non-edges exist.
Graph random_edge_insertion(const Graph& g, std::size_t count, std::uint64_t seed);

/// Additive white Gaussian noise with sigma = sqrt(mean_square(signal) / snr).
FeatureMatrix gaussian_noise(const FeatureMatrix& x, const NoiseConfig& cfg);
/// Noise is drawn for n < n' only and mirrored; the diagonal stays zero. The
/// signal power is taken over the off-diagonal entries.
WeightedGraph gaussian_noise(const WeightedGraph& a, const NoiseConfig& cfg);

/// Union-symmetrized k-nearest-neighbour graph under squared Euclidean
/// distance. Ties go to the lower node index; a node never picks itself.
Graph knn_graph(const FeatureMatrix& x, std::size_t k);

struct AttackManifest {
  std::vector<NodeId> targets;
  std::string original_hash;
  std::string notes;
};

AttackManifest load_attack_manifest(const std::filesystem::path& path);
void save_attack_manifest(const std::filesystem::path& path, const AttackManifest& m);

struct AttackedGraph {
  Graph graph;
  PerturbationDelta delta;
  std::vector<NodeId> targets;
  std::vector<std::string> warnings;  // e.g. targets with no adjacent change
};

/// Reads an attacked edge list and its manifest, checked against `original`
/// (node range, and the hash when the manifest carries one).
AttackedGraph load_attacked_graph(const std::filesystem::path& edges_path,
                                  const std::filesystem::path& manifest_path,
                                  const Graph& original);

/// For each target, links it to `budget` uniformly chosen non-neighbours of a
/// different class (any non-neighbour when the target's label is unknown).
/// Fewer edges are added when candidates run out.
Graph simple_targeted_attack(const Graph& g, std::span<const NodeId> targets, std::size_t budget,
                             const LabelData* labels, std::uint64_t seed);

/// Planted-partition graph: nodes are assigned to blocks in contiguous runs
/// of the given sizes; each pair is linked with p_in or p_out.
Graph stochastic_block_model(std::span<const std::size_t> block_sizes, double p_in, double p_out,
                             std::uint64_t seed);

/// Inserts `count` uniformly chosen non-edges whose endpoints lie in
/// different blocks (block id per node).
Graph random_cross_block_insertion(const Graph& g, std::span<const int> block_of, std::size_t count,
                                   std::uint64_t seed);

}  // namespace edagcn
