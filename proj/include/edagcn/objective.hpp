#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "edagcn/adjacency.hpp"
#include "edagcn/data.hpp"
#include "edagcn/model.hpp"

namespace edagcn {

enum class EarlyStopMetric { val_accuracy, val_loss };
enum class SmoothnessForm { adjacency, laplacian };

struct TrainConfig {
  double mu1 = 0.0;     // smoothness weight
  double mu2 = 0.0;     // l2 weight
  double sparsity = 0.0;  // l1 weight on the graph-mixing tensors
  double learning_rate = 0.005;
  std::size_t max_epochs = 300;
  std::size_t patience = 60;
  std::uint64_t seed = 0;
  EarlyStopMetric es_metric = EarlyStopMetric::val_accuracy;
  SmoothnessForm smoothness = SmoothnessForm::adjacency;

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double cross_entropy = 0.0;
  double smoothness = 0.0;
  double weight_decay = 0.0;
  double sparsity = 0.0;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -sum over masked nodes of ln max(y_hat[n, y_n], 1e-12).
double cross_entropy(const RowMatrix& y_hat, const LabelData& labels, std::span<const NodeId> mask);

/// sum_i trace(Y^T A_i Y) over the raw adjacency of every graph, or with
/// A_i replaced by its Laplacian D_i - A_i.
double smoothness_reg(const RowMatrix& y_hat, const AdjacencyPowerSet& graphs,
                      SmoothnessForm form = SmoothnessForm::adjacency);

/// Squared l2 norm of C, W (both branches) and the head weights. R and the
/// bias are excluded.
double weight_decay_reg(const ParameterSet& params);

/// sum of |R| over every layer of both branches.
double sparsity_reg(const ParameterSet& params);

LossBreakdown assemble_loss(const Activations& acts, const ParameterSet& params,
                            const AdjacencyPowerSet& graphs, const LabelData& labels,
                            std::span<const NodeId> mask, const TrainConfig& cfg);

LossBreakdown loss(const ParameterSet& params, const FeatureMatrix& x,
                   const AdjacencyPowerSet& graphs, const LabelData& labels,
                   std::span<const NodeId> mask, const ModelConfig& model_cfg,
                   const TrainConfig& cfg);

struct LossAndGradient {
  LossBreakdown loss;
  ParameterSet gradient;
  Activations activations;
};

/// Loss and its exact gradient with respect to every parameter entry.
LossAndGradient loss_and_gradient(const ParameterSet& params, const FeatureMatrix& x,
                                  const AdjacencyPowerSet& graphs, const LabelData& labels,
                                  std::span<const NodeId> mask, const ModelConfig& model_cfg,
                                  const TrainConfig& cfg);

/// Same, reusing a diffused input computed once for the whole run.
LossAndGradient loss_and_gradient(const ParameterSet& params, std::shared_ptr<const DiffusedInput> input,
                                  const AdjacencyPowerSet& graphs, const LabelData& labels,
                                  std::span<const NodeId> mask, const ModelConfig& model_cfg,
                                  const TrainConfig& cfg);

ParameterSet gradients(const ParameterSet& params, const FeatureMatrix& x,
                       const AdjacencyPowerSet& graphs, const LabelData& labels,
                       std::span<const NodeId> mask, const ModelConfig& model_cfg,
                       const TrainConfig& cfg);

}  // namespace edagcn
