#include "edagcn/objective.hpp"

#include <cmath>
#include <string>

#include "edagcn/error.hpp"

namespace edagcn {

using Eigen::Index;

void TrainConfig::validate() const {
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || !(sparsity >= 0.0))
    throw ValidationError("regularization weights must be nonnegative");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (patience > max_epochs) throw ValidationError("patience cannot exceed max_epochs");
}

namespace {

int label_of(const LabelData& labels, NodeId n) {
  if (n >= labels.n_nodes() || !labels.labels[n])
    throw ValidationError("node " + std::to_string(n) + " in mask has no label");
  return *labels.labels[n];
}

void require_mask(std::span<const NodeId> mask) {
  if (mask.empty()) throw ValidationError("objective is undefined on an empty mask");
}

template <class F>
void for_weight_tensors(const ParameterSet& params, F&& f) {
  for (const auto* layers : {&params.z_params, &params.x_params})
    for (const LayerParams& layer : *layers) {
      f(layer.hop_coeffs);
      f(layer.feature_mix);
    }
  f(params.out_weights);
}

// d(smoothness)/dY for one adjacency: (A + A^T) Y, or (L + L^T) Y with L = D - A.
RowMatrix smoothness_grad(const RowMatrix& y_hat, const AdjacencyPowerSet& graphs, SmoothnessForm form) {
  RowMatrix grad = RowMatrix::Zero(y_hat.rows(), y_hat.cols());
  for (const SparseMatrix& a : graphs.base) {
    const RowMatrix sym = a * y_hat + a.transpose() * y_hat;
    if (form == SmoothnessForm::adjacency) {
      grad += sym;
    } else {
      const Eigen::VectorXd degree = a * Eigen::VectorXd::Ones(a.cols());
      grad += 2.0 * degree.asDiagonal() * y_hat - sym;
    }
  }
  return grad;
}

}  // namespace

double cross_entropy(const RowMatrix& y_hat, const LabelData& labels, std::span<const NodeId> mask) {
  require_mask(mask);
  double total = 0.0;
  for (NodeId n : mask)
    total -= std::log(std::max(y_hat(static_cast<Index>(n), label_of(labels, n)), kProbabilityFloor));
  return total;
}

double smoothness_reg(const RowMatrix& y_hat, const AdjacencyPowerSet& graphs, SmoothnessForm form) {
  double total = 0.0;
  for (const SparseMatrix& a : graphs.base) {
    if (static_cast<Index>(graphs.n_nodes) != y_hat.rows()) throw ShapeError("prediction rows differ from N");
    // trace(Y^T A Y) = sum_ij A_ij <y_i, y_j>
    double term = (y_hat.cwiseProduct(a * y_hat)).sum();
    if (form == SmoothnessForm::laplacian) {
      const Eigen::VectorXd degree = a * Eigen::VectorXd::Ones(a.cols());
      term = (degree.asDiagonal() * y_hat.rowwise().squaredNorm()).sum() - term;
    }
    total += term;
  }
  return total;
}

double weight_decay_reg(const ParameterSet& params) {
  double total = 0.0;
  for_weight_tensors(params, [&](const Tensor& t) {
    for (double v : t.data) total += v * v;
  });
  return total;
}

double sparsity_reg(const ParameterSet& params) {
  double total = 0.0;
  for (const auto* layers : {&params.z_params, &params.x_params})
    for (const LayerParams& layer : *layers)
      for (double v : layer.graph_mix.data) total += std::abs(v);
  return total;
}

LossBreakdown assemble_loss(const Activations& acts, const ParameterSet& params, const AdjacencyPowerSet& graphs,
                            const LabelData& labels, std::span<const NodeId> mask, const TrainConfig& cfg) {
  LossBreakdown out;
  out.cross_entropy = cross_entropy(acts.y_hat, labels, mask);
  out.smoothness = smoothness_reg(acts.y_hat, graphs, cfg.smoothness);
  out.weight_decay = weight_decay_reg(params);
  out.sparsity = sparsity_reg(params);
  out.total = out.cross_entropy + cfg.mu1 * out.smoothness + cfg.mu2 * out.weight_decay + cfg.sparsity * out.sparsity;
  return out;
}

LossBreakdown loss(const ParameterSet& params, const FeatureMatrix& x, const AdjacencyPowerSet& graphs,
                   const LabelData& labels, std::span<const NodeId> mask, const ModelConfig& model_cfg,
                   const TrainConfig& cfg) {
  require_mask(mask);
  const Activations acts = model_forward(x, graphs, params, model_cfg);
  return assemble_loss(acts, params, graphs, labels, mask, cfg);
}

LossAndGradient loss_and_gradient(const ParameterSet& params, const FeatureMatrix& x,
                                  const AdjacencyPowerSet& graphs, const LabelData& labels,
                                  std::span<const NodeId> mask, const ModelConfig& model_cfg,
                                  const TrainConfig& cfg) {
  if (x.n_nodes() != model_cfg.n_nodes || x.n_features() != model_cfg.in_features)
    throw ShapeError("features do not match model config");
  return loss_and_gradient(params, std::make_shared<const DiffusedInput>(diffuse_input(x, graphs)), graphs, labels,
                           mask, model_cfg, cfg);
}

LossAndGradient loss_and_gradient(const ParameterSet& params, std::shared_ptr<const DiffusedInput> input,
                                  const AdjacencyPowerSet& graphs, const LabelData& labels,
                                  std::span<const NodeId> mask, const ModelConfig& model_cfg,
                                  const TrainConfig& cfg) {
  require_mask(mask);
  LossAndGradient out;
  out.activations = model_forward(std::move(input), graphs, params, model_cfg);
  const RowMatrix& y_hat = out.activations.y_hat;
  out.loss = assemble_loss(out.activations, params, graphs, labels, mask, cfg);

  RowMatrix d_logits = RowMatrix::Zero(y_hat.rows(), y_hat.cols());
  // Softmax and cross-entropy fused: d/dlogits = y_hat - onehot, unless the
  // probability sits under the clamp, where the term is constant.
  for (NodeId n : mask) {
    const auto r = static_cast<Index>(n);
    const int y = label_of(labels, n);
    if (y_hat(r, y) < kProbabilityFloor) continue;
    d_logits.row(r) += y_hat.row(r);
    d_logits(r, y) -= 1.0;
  }
  if (cfg.mu1 != 0.0) {
    const RowMatrix d_y = cfg.mu1 * smoothness_grad(y_hat, graphs, cfg.smoothness);
    // Softmax Jacobian-vector product: y * (dy - <dy, y>).
    const Eigen::VectorXd inner = d_y.cwiseProduct(y_hat).rowwise().sum();
    d_logits.array() += y_hat.array() * (d_y.colwise() - inner).array();
  }

  out.gradient = model_backward(out.activations, d_logits, params, graphs, model_cfg);

  if (cfg.mu2 != 0.0) {
    auto add_l2 = [&](const Tensor& p, Tensor& g) {
      for (std::size_t j = 0; j < p.size(); ++j) g[j] += 2.0 * cfg.mu2 * p[j];
    };
    for (std::size_t l = 0; l < params.z_params.size(); ++l) {
      add_l2(params.z_params[l].hop_coeffs, out.gradient.z_params[l].hop_coeffs);
      add_l2(params.z_params[l].feature_mix, out.gradient.z_params[l].feature_mix);
    }
    for (std::size_t l = 0; l < params.x_params.size(); ++l) {
      add_l2(params.x_params[l].hop_coeffs, out.gradient.x_params[l].hop_coeffs);
      add_l2(params.x_params[l].feature_mix, out.gradient.x_params[l].feature_mix);
    }
    add_l2(params.out_weights, out.gradient.out_weights);
  }
  if (cfg.sparsity != 0.0) {
    auto add_l1 = [&](const Tensor& p, Tensor& g) {
      for (std::size_t j = 0; j < p.size(); ++j)
        g[j] += cfg.sparsity * static_cast<double>((p[j] > 0.0) - (p[j] < 0.0));
    };
    for (std::size_t l = 0; l < params.z_params.size(); ++l)
      add_l1(params.z_params[l].graph_mix, out.gradient.z_params[l].graph_mix);
    for (std::size_t l = 0; l < params.x_params.size(); ++l)
      add_l1(params.x_params[l].graph_mix, out.gradient.x_params[l].graph_mix);
  }
  return out;
}

ParameterSet gradients(const ParameterSet& params, const FeatureMatrix& x, const AdjacencyPowerSet& graphs,
                       const LabelData& labels, std::span<const NodeId> mask, const ModelConfig& model_cfg,
                       const TrainConfig& cfg) {
  return loss_and_gradient(params, x, graphs, labels, mask, model_cfg, cfg).gradient;
}

}  // namespace edagcn
