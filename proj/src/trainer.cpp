#include "edagcn/trainer.hpp"

#include <cmath>
#include <string>

#include "edagcn/error.hpp"
#include "edagcn/optimizer.hpp"

namespace edagcn {

TrainResult train(const FeatureMatrix& x, const AdjacencyPowerSet& graphs, const LabelData& labels,
                  const TrainConfig& cfg, const ModelConfig& model_cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  model_cfg.validate();
  if (labels.train_mask.empty() || labels.val_mask.empty())
    throw ValidationError("training needs nonempty train and val masks");

  if (x.n_nodes() != model_cfg.n_nodes || x.n_features() != model_cfg.in_features)
    throw ShapeError("features do not match model config");
  const auto input = std::make_shared<const DiffusedInput>(diffuse_input(x, graphs));
  ParameterSet params = init_params(model_cfg, cfg.seed);
  OptimizerState state = OptimizerState::for_params(params);
  TrainResult result;
  std::size_t stale = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    LossAndGradient step = loss_and_gradient(params, input, graphs, labels, labels.train_mask, model_cfg, cfg);
    if (!std::isfinite(step.loss.total))
      throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = step.loss;
    const RowMatrix& y_hat = step.activations.y_hat;
    rec.val_accuracy = evaluate(y_hat, labels, labels.val_mask).accuracy;
    rec.val_loss = cross_entropy(y_hat, labels, labels.val_mask) / static_cast<double>(labels.val_mask.size());
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const double metric = cfg.es_metric == EarlyStopMetric::val_accuracy ? rec.val_accuracy : rec.val_loss;
    const bool improved = epoch == 0 || (cfg.es_metric == EarlyStopMetric::val_accuracy
                                             ? metric > result.best_metric
                                             : metric < result.best_metric);
    if (improved) {
      result.best_metric = metric;
      result.best_epoch = epoch;
      result.best_params = params;
      stale = 0;
    } else if (++stale > cfg.patience) {
      break;
    }
    adam_step(params, step.gradient, state, cfg.learning_rate);
  }
  return result;
}

Evaluation evaluate(const ParameterSet& params, const FeatureMatrix& x, const AdjacencyPowerSet& graphs,
                    const LabelData& labels, std::span<const NodeId> mask, const ModelConfig& model_cfg) {
  return evaluate(model_forward(x, graphs, params, model_cfg).y_hat, labels, mask);
}

}  // namespace edagcn
