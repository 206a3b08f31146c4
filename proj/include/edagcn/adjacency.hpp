#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "edagcn/graph.hpp"

namespace edagcn {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Normalization { none, symmetric };

/// Matrix powers A_i^k for every graph i and hop k = 1..K_hop.
///
/// `base` keeps the raw (unnormalized) adjacency of each graph; `powers` holds
/// the powers of either the raw adjacency (default) or of D^-1/2 A D^-1/2.
struct AdjacencyPowerSet {
  std::size_t n_nodes = 0;
  std::size_t k_hop = 0;
  Normalization normalization = Normalization::none;
  std::vector<SparseMatrix> base;                 // [graph]
  std::vector<std::vector<SparseMatrix>> powers;  // [graph][k-1]

  std::size_t n_graphs() const noexcept { return base.size(); }
  const SparseMatrix& power(std::size_t graph, std::size_t k) const { return powers.at(graph).at(k - 1); }
};

SparseMatrix adjacency_matrix(const Graph& g);

AdjacencyPowerSet adjacency_powers(std::span<const Graph> graphs, std::size_t k_hop,
                                   Normalization norm = Normalization::none);

/// Same, from arbitrary symmetric (possibly weighted) adjacency matrices.
AdjacencyPowerSet adjacency_powers(std::vector<SparseMatrix> adjacency, std::size_t k_hop,
                                   Normalization norm = Normalization::none);

}  // namespace edagcn
