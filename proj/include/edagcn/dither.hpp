#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "edagcn/graph.hpp"
#include "edagcn/rng.hpp"

namespace edagcn {

struct DitherConfig {
  double q1 = 0.9;  // probability an observed edge is kept
  double q2 = 1.0;  // probability an observed non-edge stays absent
  std::size_t i_count = 10;
  std::uint64_t seed = 0;

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
};

struct DitheredGraphSet {
  std::vector<Graph> graphs;
  DitherConfig config;
  Graph source;
};

/// Draws config.i_count auxiliary graphs from `source`.
///
/// Each observed edge survives with probability q1; each observed non-edge
/// (unordered, no self pairs) is added with probability 1 - q2. Graph i uses
/// its own stream derive_seed(seed, i), so the result does not depend on the
/// order or the number of threads used. `threads` = 0 reads EDAGCN_THREADS.
DitheredGraphSet dither(const Graph& source, const DitherConfig& cfg, std::size_t threads = 1);

/// One auxiliary graph drawn from `rng`.
Graph dither_one(const Graph& source, double q1, double q2, Rng& rng);

/// `count` distinct non-edges of g, uniform over all such subsets, sorted.
/// Throws ValidationError when count exceeds the number of non-edges.
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng);

/// Writes graph_<i>.tsv for every draw plus manifest.json.
void save_dithered_set(const std::filesystem::path& dir, const DitheredGraphSet& set,
                       const std::string& config_hash = {});

/// Worker count from EDAGCN_THREADS (default 1, minimum 1).
std::size_t thread_budget();

}  // namespace edagcn
