#include "edagcn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edagcn/dither.hpp"
#include "edagcn/error.hpp"
#include "edagcn/objective.hpp"
#include "edagcn/perturb.hpp"
#include "edagcn/rng.hpp"

namespace edagcn {

ModelConfig ModelSettings::resolve(std::size_t n_nodes, std::size_t in_features, std::size_t n_classes,
                                   std::size_t i_count) const {
  ModelConfig cfg;
  cfg.widths = widths.empty() ? std::vector<std::size_t>{64, 8, n_classes} : widths;
  cfg.k_hop = k_hop;
  cfg.i_count = i_count;
  cfg.n_nodes = n_nodes;
  cfg.in_features = in_features;
  cfg.n_classes = n_classes;
  cfg.r_mode = r_mode;
  cfg.w_mode = w_mode;
  cfg.residual = residual;
  cfg.head = head;
  cfg.validate();
  return cfg;
}

RunResult train_and_test(const FeatureMatrix& x, const AdjacencyPowerSet& graphs, const LabelData& labels,
                         const ModelSettings& settings, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  RunResult out;
  out.model = settings.resolve(x.n_nodes(), x.n_features(), labels.n_classes(), graphs.n_graphs());
  out.training = train(x, graphs, labels, cfg, out.model, on_epoch);
  if (!labels.test_mask.empty())
    out.test = evaluate(out.training.best_params, x, graphs, labels, labels.test_mask, out.model);
  return out;
}

Instance gradcheck_instance(std::uint64_t seed, MixMode r_mode, MixMode w_mode, bool residual) {
  constexpr std::size_t n = 12, f = 5, classes = 3;
  Instance inst;
  const std::size_t one_block[] = {n};
  const Graph source = stochastic_block_model(one_block, 0.3, 0.0, derive_seed(seed, 1));
  inst.graphs = dither(source, DitherConfig{0.8, 0.85, 3, derive_seed(seed, 2)}).graphs;
  inst.powers = adjacency_powers(inst.graphs, 2);

  Rng rng = make_rng(seed, 3);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  inst.x.values.resize(n, f);
  for (Eigen::Index r = 0; r < inst.x.values.rows(); ++r)
    for (Eigen::Index c = 0; c < inst.x.values.cols(); ++c) inst.x.values(r, c) = uniform(-1.0, 1.0);

  std::vector<std::optional<int>> y(n);
  for (auto& v : y) v = static_cast<int>(rng() % classes);
  std::vector<NodeId> train_nodes, val, test;
  for (NodeId v = 0; v < n; ++v) (v < 8 ? train_nodes : v < 10 ? val : test).push_back(v);
  inst.labels = LabelData::build(std::move(y), train_nodes, val, test, classes);

  ModelSettings settings;
  settings.widths = {4, 3};
  settings.k_hop = 2;
  settings.r_mode = r_mode;
  settings.w_mode = w_mode;
  settings.residual = residual;
  inst.model = settings.resolve(n, f, classes, inst.graphs.size());

  inst.train.mu1 = 0.05;
  inst.train.mu2 = 0.01;
  inst.train.sparsity = 0.01;

  inst.params = init_params(inst.model, derive_seed(seed, 4));
  auto spread = [&](LayerParams& layer) {
    for (double& c : layer.hop_coeffs.data) c = uniform(0.3, 1.0);
    for (double& r : layer.graph_mix.data) r = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(0.05, 0.8);
  };
  for (auto& layer : inst.params.z_params) spread(layer);
  for (auto& layer : inst.params.x_params) spread(layer);
  // Raw adjacency powers make logits large; shrink the head so the softmax is
  // not saturated and every node carries gradient.
  for (double& w : inst.params.out_weights.data) w *= 0.1;
  for (double& b : inst.params.out_bias.data) b = uniform(-0.1, 0.1);
  return inst;
}

GradCheckReport check_instance_gradient(const Instance& inst, double step, double tolerance, bool corrupt) {
  // Every node enters the objective so per-node parameters all see a direct
  // cross-entropy signal; otherwise some gradients sit at roundoff level.
  std::vector<NodeId> mask(inst.x.n_nodes());
  std::iota(mask.begin(), mask.end(), NodeId{0});
  ParameterSet analytic = gradients(inst.params, inst.x, inst.powers, inst.labels, mask, inst.model, inst.train);
  if (corrupt) {
    double* worst = nullptr;
    analytic.for_each([&](const std::string&, Tensor& t) {
      for (double& v : t.data)
        if (!worst || std::abs(v) > std::abs(*worst)) worst = &v;
    });
    if (worst) *worst *= 2.0;
  }
  const auto objective = [&](const ParameterSet& p) {
    return loss(p, inst.x, inst.powers, inst.labels, mask, inst.model, inst.train).total;
  };
  return grad_check(inst.params, analytic, objective, step, tolerance);
}

SbmExperiment make_sbm_experiment(const SbmSpec& spec, std::uint64_t seed) {
  SbmExperiment out;
  const std::size_t sizes[] = {spec.nodes_per_block, spec.nodes_per_block};
  out.clean = stochastic_block_model(sizes, spec.p_in, spec.p_out, derive_seed(seed, 1));
  const std::size_t n = out.clean.n_nodes();
  out.block.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.block[v] = v < spec.nodes_per_block ? 0 : 1;
  out.perturbed = random_cross_block_insertion(out.clean, out.block, spec.inserted_edges, derive_seed(seed, 2));
  out.x = FeatureMatrix::identity(n);

  Rng rng = make_rng(seed, 3);
  std::vector<NodeId> train_nodes, val, test;
  const auto n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(spec.nodes_per_block)));
  const auto n_val = static_cast<std::size_t>(std::lround(spec.val_fraction * static_cast<double>(spec.nodes_per_block)));
  for (std::size_t b = 0; b < 2; ++b) {
    std::vector<NodeId> nodes(spec.nodes_per_block);
    std::iota(nodes.begin(), nodes.end(), static_cast<NodeId>(b * spec.nodes_per_block));
    for (std::size_t j = nodes.size(); j > 1; --j) {
      std::uniform_int_distribution<std::size_t> pick(0, j - 1);
      std::swap(nodes[j - 1], nodes[pick(rng)]);
    }
    for (std::size_t j = 0; j < nodes.size(); ++j)
      (j < n_train ? train_nodes : j < n_train + n_val ? val : test).push_back(nodes[j]);
  }
  std::vector<std::optional<int>> y(n);
  for (std::size_t v = 0; v < n; ++v) y[v] = out.block[v];
  out.labels = LabelData::build(std::move(y), std::move(train_nodes), std::move(val), std::move(test), 2);
  return out;
}

}  // namespace edagcn
