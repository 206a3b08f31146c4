#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "edagcn/dither.hpp"
#include "edagcn/graph.hpp"

namespace edagcn {

/// Tallies of the four (observed, clean) pair configurations.
struct EdgeEventCounts {
  std::size_t kappa = 0;    // observed 1, clean 1
  std::size_t lambda_ = 0;  // observed 1, clean 0 (spurious edge)
  std::size_t mu = 0;       // observed 0, clean 1 (missing edge)
  std::size_t nu = 0;       // observed 0, clean 0

  std::size_t total() const noexcept { return kappa + lambda_ + mu + nu; }
  friend bool operator==(const EdgeEventCounts&, const EdgeEventCounts&) = default;
};

enum class PairCase { kept_edge, spurious_edge, missing_edge, kept_nonedge };

/// Probability that some of the I draws puts the pair back to its clean
/// value. Only spurious_edge and missing_edge are accepted.
double edge_restore_probability(PairCase c, double q1, double q2, std::size_t i_count);

/// Probability that at least one of I independent draws agrees with the
/// clean value of a pair in configuration `c`.
double per_pair_union_probability(PairCase c, double q1, double q2, std::size_t i_count);

/// Counts over all unordered pairs, or over pairs (node, n') when node is set.
EdgeEventCounts count_edge_events(const Graph& original, const Graph& perturbed,
                                  std::optional<NodeId> node = std::nullopt);

/// Product of the per-pair union probabilities, one factor per counted pair.
/// Accumulated in log space when more than 50 pairs are involved.
double neighborhood_recovery_probability(const EdgeEventCounts& counts, double q1, double q2,
                                         std::size_t i_count);

enum class RecoverySemantics { per_pair_union, single_draw_full };

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct McRecovery {
  McEstimate per_pair_union;
  McEstimate single_draw_full;
};

/// Monte-Carlo estimate of row recovery for `node` using the real sampler.
///
/// Every trial draws a fresh dithered set of the perturbed graph. The
/// per-pair-union event holds when each pair (node, n') takes its clean value
/// in at least one draw; the single-draw-full event when one draw reproduces
/// the entire clean row. Both are scored on the same draws, so the second
/// never exceeds the first.
McRecovery monte_carlo_recovery(const Graph& original, const Graph& perturbed, NodeId node,
                                const DitherConfig& cfg, std::size_t trials);

McEstimate monte_carlo_recovery(const Graph& original, const Graph& perturbed, NodeId node,
                                const DitherConfig& cfg, std::size_t trials,
                                RecoverySemantics semantics);

/// Mean and binomial standard error sqrt(p(1-p)/n) of `successes` out of n.
McEstimate binomial_estimate(std::size_t successes, std::size_t trials);

}  // namespace edagcn
