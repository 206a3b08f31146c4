#pragma once

#include <functional>
#include <vector>

#include "edagcn/metrics.hpp"
#include "edagcn/objective.hpp"

namespace edagcn {

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown train_loss;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ParameterSet best_params;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::vector<EpochRecord> history;
};

/// Called after each recorded epoch (for streaming history out).
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full-batch Adam on the train mask with early stopping on the val mask.
///
/// Epoch e evaluates the current parameters (train loss, val metric) and then
/// takes one step, so the returned parameters are exactly those whose val
/// metric is best in the history. Training stops once more than `patience`
/// consecutive epochs fail to improve, or after max_epochs. Throws
/// NumericError naming the epoch when the loss turns non-finite.
TrainResult train(const FeatureMatrix& x, const AdjacencyPowerSet& graphs, const LabelData& labels,
                  const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const EpochCallback& on_epoch = {});

Evaluation evaluate(const ParameterSet& params, const FeatureMatrix& x,
                    const AdjacencyPowerSet& graphs, const LabelData& labels,
                    std::span<const NodeId> mask, const ModelConfig& model_cfg);

}  // namespace edagcn
