#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edagcn {

using NodeId = std::uint32_t;

/// Unordered node pair, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  auto operator<=>(const Edge&) const = default;
};

/// Undirected, unweighted simple graph on nodes 0..N-1.
///
/// Edges are kept sorted and unique, each stored once with u < v, alongside a
/// sorted adjacency list per node. Self-loops and out-of-range endpoints are
/// rejected at construction; duplicate or mirrored pairs collapse to one edge.
/// Immutable once built.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n_nodes);
  Graph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Number of unordered pairs {u, v}, u != v, that are not edges.
  std::size_t num_non_edges() const noexcept;

  bool has_edge(NodeId a, NodeId b) const;
  std::span<const NodeId> neighbors(NodeId n) const;
  std::size_t degree(NodeId n) const { return neighbors(n).size(); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_nodes_ == b.n_nodes_ && a.edges_ == b.edges_;
  }

 private:
  void build_index();

  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

/// Signed difference between a clean and an observed graph: +1 entries are
/// insertions, -1 entries are deletions.
struct PerturbationDelta {
  std::size_t n_nodes = 0;
  std::vector<Edge> insertions;  // sorted
  std::vector<Edge> deletions;   // sorted

  bool empty() const noexcept { return insertions.empty() && deletions.empty(); }
  friend bool operator==(const PerturbationDelta&, const PerturbationDelta&) = default;
};

/// Nodes adjacent to n (n itself is never included).
std::vector<NodeId> neighborhood(const Graph& g, NodeId n);

PerturbationDelta perturbation_delta(const Graph& original, const Graph& perturbed);

/// Applies d to g. Throws ValidationError when an insertion is already an edge
/// or a deletion is not one, or when the two sets overlap.
Graph apply_delta(const Graph& g, const PerturbationDelta& d);

/// Stable 64-bit FNV-1a digest of N and the sorted edge list, as 16 hex digits.
std::string graph_hash(const Graph& g);

/// FNV-1a over arbitrary bytes, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

/// Rank of pair (u < v) in the row-major enumeration of all unordered pairs.
std::uint64_t pair_index(Edge e, std::size_t n_nodes);
/// Inverse of pair_index.
Edge pair_from_index(std::uint64_t index, std::size_t n_nodes);

}  // namespace edagcn
