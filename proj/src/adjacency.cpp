#include "edagcn/adjacency.hpp"

#include <cmath>

#include "edagcn/error.hpp"

namespace edagcn {

SparseMatrix adjacency_matrix(const Graph& g) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.num_edges());
  for (const Edge& e : g.edges()) {
    trip.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), 1.0);
    trip.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), 1.0);
  }
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

namespace {

// D^-1/2 A D^-1/2 with D the absolute row sums; isolated rows stay zero.
SparseMatrix normalize_symmetric(const SparseMatrix& a) {
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double d = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) d += std::abs(it.value());
    if (d > 0.0) scale(r) = 1.0 / std::sqrt(d);
  }
  SparseMatrix out = a;
  for (Eigen::Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() *= scale(r) * scale(it.col());
  return out;
}

}  // namespace

AdjacencyPowerSet adjacency_powers(std::vector<SparseMatrix> adjacency, std::size_t k_hop,
                                   Normalization norm) {
  if (k_hop < 1) throw ValidationError("k_hop must be at least 1");
  AdjacencyPowerSet out;
  out.k_hop = k_hop;
  out.normalization = norm;
  if (!adjacency.empty()) out.n_nodes = static_cast<std::size_t>(adjacency.front().rows());
  for (const SparseMatrix& a : adjacency)
    if (static_cast<std::size_t>(a.rows()) != out.n_nodes || a.rows() != a.cols())
      throw ShapeError("adjacency matrices must all be N x N with the same N");
  out.powers.reserve(adjacency.size());
  for (const SparseMatrix& a : adjacency) {
    const SparseMatrix step = norm == Normalization::symmetric ? normalize_symmetric(a) : a;
    std::vector<SparseMatrix> hops;
    hops.reserve(k_hop);
    hops.push_back(step);
    for (std::size_t k = 2; k <= k_hop; ++k) {
      SparseMatrix next = (hops.back() * step).pruned();
      hops.push_back(std::move(next));
    }
    out.powers.push_back(std::move(hops));
  }
  out.base = std::move(adjacency);
  return out;
}

AdjacencyPowerSet adjacency_powers(std::span<const Graph> graphs, std::size_t k_hop, Normalization norm) {
  std::vector<SparseMatrix> mats;
  mats.reserve(graphs.size());
  for (const Graph& g : graphs) {
    if (!mats.empty() && g.n_nodes() != graphs.front().n_nodes())
      throw ShapeError("graphs differ in node count");
    mats.push_back(adjacency_matrix(g));
  }
  return adjacency_powers(std::move(mats), k_hop, norm);
}

}  // namespace edagcn
