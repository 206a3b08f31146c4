#include "edagcn/dither.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "edagcn/error.hpp"
#include "edagcn/io.hpp"

namespace edagcn {

void DitherConfig::validate() const {
  if (!(q1 >= 0.0 && q1 <= 1.0)) throw ValidationError("q1 must lie in [0, 1]");
  if (!(q2 >= 0.0 && q2 <= 1.0)) throw ValidationError("q2 must lie in [0, 1]");
  if (i_count < 1) throw ValidationError("i_count must be at least 1");
}

std::size_t thread_budget() {
  const char* env = std::getenv("EDAGCN_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  return (end != env && v > 0) ? static_cast<std::size_t>(v) : 1;
}

namespace {

// Distinct uniformly chosen non-edge pair ranks, by rejection.
std::unordered_set<std::uint64_t> draw_distinct_non_edges(const Graph& g, std::size_t count, Rng& rng) {
  const std::uint64_t total = static_cast<std::uint64_t>(g.n_nodes()) * (g.n_nodes() - 1) / 2;
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  while (chosen.size() < count) {
    const std::uint64_t idx = pick(rng);
    if (chosen.contains(idx)) continue;
    const Edge e = pair_from_index(idx, g.n_nodes());
    if (g.has_edge(e.u, e.v)) continue;
    chosen.insert(idx);
  }
  return chosen;
}

}  // namespace

std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng) {
  const std::size_t available = g.num_non_edges();
  if (count > available)
    throw ValidationError("requested " + std::to_string(count) + " non-edges but only " +
                          std::to_string(available) + " exist");
  std::vector<Edge> out;
  if (count == 0) return out;
  out.reserve(count);
  if (count <= available / 2) {
    for (std::uint64_t idx : draw_distinct_non_edges(g, count, rng))
      out.push_back(pair_from_index(idx, g.n_nodes()));
  } else {
    // Dense request: choose the complement and enumerate the rest.
    const auto excluded = draw_distinct_non_edges(g, available - count, rng);
    const auto n = static_cast<NodeId>(g.n_nodes());
    for (NodeId u = 0; u < n; ++u) {
      auto nb = g.neighbors(u);
      auto it = std::upper_bound(nb.begin(), nb.end(), u);
      for (NodeId v = u + 1; v < n; ++v) {
        while (it != nb.end() && *it < v) ++it;
        if (it != nb.end() && *it == v) continue;
        if (!excluded.contains(pair_index({u, v}, g.n_nodes()))) out.emplace_back(u, v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Graph dither_one(const Graph& source, double q1, double q2, Rng& rng) {
  std::vector<Edge> kept;
  kept.reserve(source.num_edges());
  for (const Edge& e : source.edges())
    if (uniform01(rng) < q1) kept.push_back(e);

  const double p_insert = 1.0 - q2;
  const std::size_t non_edges = source.num_non_edges();
  std::size_t n_insert = 0;
  if (p_insert >= 1.0) {
    n_insert = non_edges;
  } else if (p_insert > 0.0 && non_edges > 0) {
    std::binomial_distribution<long long> count(static_cast<long long>(non_edges), p_insert);
    n_insert = static_cast<std::size_t>(count(rng));
  }
  std::vector<Edge> inserted = sample_non_edges(source, n_insert, rng);

  std::vector<Edge> merged;
  merged.reserve(kept.size() + inserted.size());
  std::merge(kept.begin(), kept.end(), inserted.begin(), inserted.end(), std::back_inserter(merged));
  return Graph(source.n_nodes(), std::move(merged));
}

DitheredGraphSet dither(const Graph& source, const DitherConfig& cfg, std::size_t threads) {
  cfg.validate();
  if (threads == 0) threads = thread_budget();
  DitheredGraphSet out{std::vector<Graph>(cfg.i_count), cfg, source};
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < cfg.i_count; i += stride) {
      Rng rng = make_rng(cfg.seed, i);
      out.graphs[i] = dither_one(source, cfg.q1, cfg.q2, rng);
    }
  };
  threads = std::min(threads, cfg.i_count);
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return out;
}

void save_dithered_set(const std::filesystem::path& dir, const DitheredGraphSet& set,
                       const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  nlohmann::json hashes = nlohmann::json::array();
  for (std::size_t i = 0; i < set.graphs.size(); ++i) {
    const std::string name = "graph_" + std::to_string(i) + ".tsv";
    save_edge_list(dir / name, set.graphs[i]);
    files.push_back(name);
    hashes.push_back(graph_hash(set.graphs[i]));
  }
  nlohmann::json manifest = {
      {"q1", set.config.q1},         {"q2", set.config.q2},
      {"i_count", set.config.i_count}, {"seed", set.config.seed},
      {"n_nodes", set.source.n_nodes()}, {"source_hash", graph_hash(set.source)},
      {"files", files},              {"graph_hashes", hashes},
  };
  if (!config_hash.empty()) manifest["config_hash"] = config_hash;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw ValidationError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace edagcn
