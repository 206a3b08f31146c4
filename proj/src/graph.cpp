#include "edagcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <string>

#include "edagcn/error.hpp"

namespace edagcn {

Graph::Graph(std::size_t n_nodes) : n_nodes_(n_nodes) { build_index(); }

Graph::Graph(std::size_t n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    e = Edge(e.u, e.v);
    if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
    if (e.v >= n_nodes_)
      throw BoundsError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                        ") outside 0.." + std::to_string(n_nodes_ ? n_nodes_ - 1 : 0));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  build_index();
}

void Graph::build_index() {
  offsets_.assign(n_nodes_ + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t n = 0; n < n_nodes_; ++n) offsets_[n + 1] += offsets_[n];
  targets_.assign(offsets_.back(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    targets_[cursor[e.u]++] = e.v;
    targets_[cursor[e.v]++] = e.u;
  }
  for (std::size_t n = 0; n < n_nodes_; ++n)
    std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[n]),
              targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[n + 1]));
}

std::size_t Graph::num_non_edges() const noexcept {
  return n_nodes_ * (n_nodes_ ? n_nodes_ - 1 : 0) / 2 - edges_.size();
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (a >= n_nodes_ || b >= n_nodes_ || a == b) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::span<const NodeId> Graph::neighbors(NodeId n) const {
  if (n >= n_nodes_) throw BoundsError("node " + std::to_string(n) + " out of range");
  return {targets_.data() + offsets_[n], offsets_[n + 1] - offsets_[n]};
}

std::vector<NodeId> neighborhood(const Graph& g, NodeId n) {
  auto nb = g.neighbors(n);
  return {nb.begin(), nb.end()};
}

namespace {

void require_same_size(const Graph& a, const Graph& b) {
  if (a.n_nodes() != b.n_nodes())
    throw ShapeError("graphs have " + std::to_string(a.n_nodes()) + " and " +
                     std::to_string(b.n_nodes()) + " nodes");
}

std::vector<Edge> difference(const std::vector<Edge>& a, const std::vector<Edge>& b) {
  std::vector<Edge> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

PerturbationDelta perturbation_delta(const Graph& original, const Graph& perturbed) {
  require_same_size(original, perturbed);
  return {original.n_nodes(), difference(perturbed.edges(), original.edges()),
          difference(original.edges(), perturbed.edges())};
}

Graph apply_delta(const Graph& g, const PerturbationDelta& d) {
  if (d.n_nodes != g.n_nodes()) throw ShapeError("delta and graph differ in node count");
  std::vector<Edge> ins = d.insertions, del = d.deletions;
  std::sort(ins.begin(), ins.end());
  std::sort(del.begin(), del.end());
  std::vector<Edge> overlap;
  std::set_intersection(ins.begin(), ins.end(), del.begin(), del.end(), std::back_inserter(overlap));
  if (!overlap.empty()) throw ValidationError("pair listed as both insertion and deletion");
  for (const Edge& e : ins)
    if (g.has_edge(e.u, e.v))
      throw ValidationError("insertion (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") is already an edge");
  for (const Edge& e : del)
    if (!g.has_edge(e.u, e.v))
      throw ValidationError("deletion (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") is not an edge");
  std::vector<Edge> kept = difference(g.edges(), del);
  std::vector<Edge> merged;
  merged.reserve(kept.size() + ins.size());
  std::merge(kept.begin(), kept.end(), ins.begin(), ins.end(), std::back_inserter(merged));
  return Graph(g.n_nodes(), std::move(merged));
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string graph_hash(const Graph& g) {
  std::string text = std::to_string(g.n_nodes()) + "\n";
  for (const Edge& e : g.edges()) text += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  return fnv1a_hex(text);
}

std::uint64_t pair_index(Edge e, std::size_t n_nodes) {
  const std::uint64_t n = n_nodes, u = e.u;
  return u * (2 * n - u - 1) / 2 + (e.v - e.u - 1);
}

Edge pair_from_index(std::uint64_t index, std::size_t n_nodes) {
  const std::uint64_t n = n_nodes;
  auto row_start = [n](std::uint64_t u) { return u * (2 * n - u - 1) / 2; };
  // Solve row_start(u) <= index for the largest u, then fix rounding.
  const double nn = static_cast<double>(2 * n - 1);
  double guess = std::floor((nn - std::sqrt(nn * nn - 8.0 * static_cast<double>(index))) / 2.0);
  std::uint64_t u = guess < 0 ? 0 : static_cast<std::uint64_t>(guess);
  if (u >= n) u = n - 1;
  while (u > 0 && row_start(u) > index) --u;
  while (u + 1 < n && row_start(u + 1) <= index) ++u;
  const std::uint64_t v = index - row_start(u) + u + 1;
  return {static_cast<NodeId>(u), static_cast<NodeId>(v)};
}

}  // namespace edagcn
