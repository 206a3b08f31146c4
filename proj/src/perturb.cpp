#include "edagcn/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <string>

#include <json.hpp>

#include "edagcn/dither.hpp"
#include "edagcn/error.hpp"
#include "edagcn/io.hpp"
#include "edagcn/rng.hpp"

namespace edagcn {

using Eigen::Index;

WeightedGraph WeightedGraph::from_graph(const Graph& g) {
  const auto n = static_cast<Index>(g.n_nodes());
  WeightedGraph w{RowMatrix::Zero(n, n)};
  for (const Edge& e : g.edges()) w.weights(e.u, e.v) = w.weights(e.v, e.u) = 1.0;
  return w;
}

SparseMatrix WeightedGraph::to_sparse() const { return weights.sparseView(); }

namespace {

// Takes `count` items from `pool` by partial Fisher-Yates.
template <class T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (std::size_t j = 0; j < count; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

Graph with_extra_edges(const Graph& g, std::vector<Edge> extra) {
  std::vector<Edge> all = g.edges();
  all.insert(all.end(), extra.begin(), extra.end());
  return Graph(g.n_nodes(), std::move(all));
}

void require_snr(double snr) {
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
}

}  // namespace

Graph random_edge_insertion(const Graph& g, std::size_t count, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return with_extra_edges(g, sample_non_edges(g, count, rng));
}

FeatureMatrix gaussian_noise(const FeatureMatrix& x, const NoiseConfig& cfg) {
  require_snr(cfg.snr);
  FeatureMatrix out = x;
  if (x.values.size() == 0) return out;
  const double power = x.values.squaredNorm() / static_cast<double>(x.values.size());
  const double sigma = std::sqrt(power / cfg.snr);
  if (!(sigma > 0.0)) return out;
  Rng rng = make_rng(cfg.seed, 0);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Index r = 0; r < out.values.rows(); ++r)
    for (Index c = 0; c < out.values.cols(); ++c) out.values(r, c) += noise(rng);
  return out;
}

WeightedGraph gaussian_noise(const WeightedGraph& a, const NoiseConfig& cfg) {
  require_snr(cfg.snr);
  const Index n = a.weights.rows();
  WeightedGraph out = a;
  if (n < 2) return out;
  double power = 0.0;
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      if (r != c) power += a.weights(r, c) * a.weights(r, c);
  power /= static_cast<double>(n * (n - 1));
  const double sigma = std::sqrt(power / cfg.snr);
  if (!(sigma > 0.0)) return out;
  Rng rng = make_rng(cfg.seed, 0);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Index r = 0; r < n; ++r)
    for (Index c = r + 1; c < n; ++c) {
      const double e = noise(rng);
      out.weights(r, c) += e;
      out.weights(c, r) = out.weights(r, c);
    }
  out.weights.diagonal().setZero();
  return out;
}

Graph knn_graph(const FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.n_nodes();
  if (k < 1 || k >= n) throw ValidationError("k must satisfy 1 <= k < N");
  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::pair<double, NodeId>> dist(n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t j = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      dist[j++] = {(x.values.row(static_cast<Index>(a)) - x.values.row(static_cast<Index>(b))).squaredNorm(),
                   static_cast<NodeId>(b)};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t m = 0; m < k; ++m) edges.emplace_back(static_cast<NodeId>(a), dist[m].second);
  }
  return Graph(n, std::move(edges));
}

AttackManifest load_attack_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    AttackManifest m;
    m.targets = j.value("targets", std::vector<NodeId>{});
    m.original_hash = j.value("original_hash", std::string());
    m.notes = j.value("notes", std::string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("attack manifest " + path.string() + ": " + e.what());
  }
}

void save_attack_manifest(const std::filesystem::path& path, const AttackManifest& m) {
  const nlohmann::json j = {{"targets", m.targets}, {"original_hash", m.original_hash}, {"notes", m.notes}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

AttackedGraph load_attacked_graph(const std::filesystem::path& edges_path,
                                  const std::filesystem::path& manifest_path, const Graph& original) {
  const AttackManifest manifest = load_attack_manifest(manifest_path);
  if (!manifest.original_hash.empty() && manifest.original_hash != graph_hash(original))
    throw ValidationError("attack manifest was produced for a different original graph");
  AttackedGraph out;
  out.graph = load_edge_list(edges_path, original.n_nodes());
  out.delta = perturbation_delta(original, out.graph);
  out.targets = manifest.targets;
  std::sort(out.targets.begin(), out.targets.end());
  out.targets.erase(std::unique(out.targets.begin(), out.targets.end()), out.targets.end());
  for (NodeId t : out.targets) {
    if (t >= original.n_nodes()) throw ValidationError("target node " + std::to_string(t) + " out of range");
    auto touches = [t](const Edge& e) { return e.u == t || e.v == t; };
    if (std::none_of(out.delta.insertions.begin(), out.delta.insertions.end(), touches) &&
        std::none_of(out.delta.deletions.begin(), out.delta.deletions.end(), touches))
      out.warnings.push_back("target " + std::to_string(t) + " has no adjacent change");
  }
  return out;
}

Graph simple_targeted_attack(const Graph& g, std::span<const NodeId> targets, std::size_t budget,
                             const LabelData* labels, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::set<Edge> edges(g.edges().begin(), g.edges().end());
  const auto n = static_cast<NodeId>(g.n_nodes());
  auto label = [&](NodeId v) -> std::optional<int> {
    if (!labels || v >= labels->n_nodes()) return std::nullopt;
    return labels->labels[v];
  };
  for (NodeId t : targets) {
    if (t >= n) throw BoundsError("target node " + std::to_string(t) + " out of range");
    if (budget == 0) continue;
    const auto own = label(t);
    std::vector<NodeId> candidates;
    for (NodeId v = 0; v < n; ++v) {
      if (v == t || edges.contains(Edge(t, v))) continue;
      if (own) {
        const auto other = label(v);
        if (!other || *other == *own) continue;
      }
      candidates.push_back(v);
    }
    for (NodeId v : draw_without_replacement(std::move(candidates), budget, rng)) edges.insert(Edge(t, v));
  }
  return Graph(g.n_nodes(), std::vector<Edge>(edges.begin(), edges.end()));
}

Graph stochastic_block_model(std::span<const std::size_t> block_sizes, double p_in, double p_out,
                             std::uint64_t seed) {
  std::vector<int> block;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) block.insert(block.end(), block_sizes[b], static_cast<int>(b));
  const auto n = static_cast<NodeId>(block.size());
  Rng rng = make_rng(seed, 0);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < (block[u] == block[v] ? p_in : p_out)) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

Graph random_cross_block_insertion(const Graph& g, std::span<const int> block_of, std::size_t count,
                                   std::uint64_t seed) {
  if (block_of.size() != g.n_nodes()) throw ShapeError("block assignment length differs from N");
  std::vector<Edge> pool;
  const auto n = static_cast<NodeId>(g.n_nodes());
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (block_of[u] != block_of[v] && !g.has_edge(u, v)) pool.emplace_back(u, v);
  if (count > pool.size()) throw ValidationError("not enough cross-block non-edges");
  Rng rng = make_rng(seed, 0);
  return with_extra_edges(g, draw_without_replacement(std::move(pool), count, rng));
}

}  // namespace edagcn
