#include "edagcn/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "edagcn/error.hpp"

namespace edagcn {
namespace {

double pow_i(double q, std::size_t i_count) { return std::pow(q, static_cast<double>(i_count)); }

void check_probabilities(double q1, double q2, std::size_t i_count) {
  DitherConfig{q1, q2, i_count, 0}.validate();
}

// Probability that all I draws disagree with the clean value of the pair.
double miss_probability(PairCase c, double q1, double q2, std::size_t i_count) {
  switch (c) {
    case PairCase::kept_edge: return pow_i(1.0 - q1, i_count);
    case PairCase::spurious_edge: return pow_i(q1, i_count);
    case PairCase::missing_edge: return pow_i(q2, i_count);
    case PairCase::kept_nonedge: return pow_i(1.0 - q2, i_count);
  }
  return 1.0;
}

}  // namespace

double edge_restore_probability(PairCase c, double q1, double q2, std::size_t i_count) {
  check_probabilities(q1, q2, i_count);
  if (c != PairCase::spurious_edge && c != PairCase::missing_edge)
    throw ValidationError("restore probability is defined for perturbed pairs only");
  return 1.0 - miss_probability(c, q1, q2, i_count);
}

double per_pair_union_probability(PairCase c, double q1, double q2, std::size_t i_count) {
  check_probabilities(q1, q2, i_count);
  return 1.0 - miss_probability(c, q1, q2, i_count);
}

EdgeEventCounts count_edge_events(const Graph& original, const Graph& perturbed, std::optional<NodeId> node) {
  if (original.n_nodes() != perturbed.n_nodes()) throw ShapeError("graphs differ in node count");
  EdgeEventCounts c;
  std::size_t universe = 0;
  auto tally = [&](auto clean, auto observed) {
    std::vector<NodeId> both;
    std::set_intersection(clean.begin(), clean.end(), observed.begin(), observed.end(), std::back_inserter(both));
    c.kappa = both.size();
    c.lambda_ = static_cast<std::size_t>(std::distance(observed.begin(), observed.end())) - c.kappa;
    c.mu = static_cast<std::size_t>(std::distance(clean.begin(), clean.end())) - c.kappa;
  };
  if (node) {
    tally(original.neighbors(*node), perturbed.neighbors(*node));
    universe = original.n_nodes() - 1;
  } else {
    std::vector<Edge> both;
    std::set_intersection(original.edges().begin(), original.edges().end(), perturbed.edges().begin(),
                          perturbed.edges().end(), std::back_inserter(both));
    c.kappa = both.size();
    c.lambda_ = perturbed.num_edges() - c.kappa;
    c.mu = original.num_edges() - c.kappa;
    universe = original.n_nodes() * (original.n_nodes() ? original.n_nodes() - 1 : 0) / 2;
  }
  c.nu = universe - c.kappa - c.lambda_ - c.mu;
  return c;
}

double neighborhood_recovery_probability(const EdgeEventCounts& counts, double q1, double q2,
                                         std::size_t i_count) {
  const std::pair<PairCase, std::size_t> factors[] = {
      {PairCase::kept_edge, counts.kappa},
      {PairCase::spurious_edge, counts.lambda_},
      {PairCase::missing_edge, counts.mu},
      {PairCase::kept_nonedge, counts.nu},
  };
  check_probabilities(q1, q2, i_count);
  if (counts.total() > 50) {
    double log_p = 0.0;
    for (auto [c, m] : factors) {
      if (m == 0) continue;
      const double miss = miss_probability(c, q1, q2, i_count);
      if (miss >= 1.0) return 0.0;
      log_p += static_cast<double>(m) * std::log1p(-miss);
    }
    return std::exp(log_p);
  }
  double p = 1.0;
  for (auto [c, m] : factors)
    if (m > 0) p *= std::pow(per_pair_union_probability(c, q1, q2, i_count), static_cast<double>(m));
  return p;
}

McEstimate binomial_estimate(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw ValidationError("at least one trial is required");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), trials};
}

McRecovery monte_carlo_recovery(const Graph& original, const Graph& perturbed, NodeId node,
                                const DitherConfig& cfg, std::size_t trials) {
  if (original.n_nodes() != perturbed.n_nodes()) throw ShapeError("graphs differ in node count");
  if (node >= original.n_nodes()) throw BoundsError("node out of range");
  if (trials == 0) throw ValidationError("at least one trial is required");
  cfg.validate();

  const auto clean = original.neighbors(node);
  const auto n = static_cast<NodeId>(original.n_nodes());
  std::size_t union_hits = 0, full_hits = 0;
  std::vector<char> matched(n);
  for (std::size_t t = 0; t < trials; ++t) {
    DitherConfig trial_cfg = cfg;
    trial_cfg.seed = derive_seed(cfg.seed, t);
    const DitheredGraphSet draws = dither(perturbed, trial_cfg, 1);
    std::fill(matched.begin(), matched.end(), 0);
    bool full = false;
    for (const Graph& g : draws.graphs) {
      const auto row = g.neighbors(node);
      if (std::equal(row.begin(), row.end(), clean.begin(), clean.end())) full = true;
      for (NodeId v = 0; v < n; ++v)
        if (v != node && !matched[v] &&
            std::binary_search(row.begin(), row.end(), v) == std::binary_search(clean.begin(), clean.end(), v))
          matched[v] = 1;
    }
    bool all = true;
    for (NodeId v = 0; v < n; ++v)
      if (v != node && !matched[v]) all = false;
    union_hits += all;
    full_hits += full;
  }
  return {binomial_estimate(union_hits, trials), binomial_estimate(full_hits, trials)};
}

McEstimate monte_carlo_recovery(const Graph& original, const Graph& perturbed, NodeId node,
                                const DitherConfig& cfg, std::size_t trials, RecoverySemantics semantics) {
  const McRecovery both = monte_carlo_recovery(original, perturbed, node, cfg, trials);
  return semantics == RecoverySemantics::per_pair_union ? both.per_pair_union : both.single_draw_full;
}

}  // namespace edagcn
