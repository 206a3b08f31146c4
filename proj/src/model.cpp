#include "edagcn/model.hpp"

#include <cmath>
#include <string>

#include "edagcn/error.hpp"
#include "edagcn/rng.hpp"

namespace edagcn {

using Eigen::Index;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void ModelConfig::validate() const {
  if (widths.empty()) throw ValidationError("model needs at least one layer");
  for (std::size_t w : widths)
    if (w < 1) throw ValidationError("layer widths must be positive");
  if (k_hop < 1) throw ValidationError("k_hop must be at least 1");
  if (i_count < 1) throw ValidationError("i_count must be at least 1");
  if (n_nodes < 1 || in_features < 1 || n_classes < 1)
    throw ValidationError("n_nodes, in_features and n_classes must be positive");
}

namespace {

LayerParams zero_layer(const ModelConfig& cfg, std::size_t p_in, std::size_t p_out) {
  const std::size_t i = cfg.i_count, n = cfg.n_nodes;
  LayerParams p;
  p.hop_coeffs = Tensor({cfg.k_hop, i});
  p.graph_mix = cfg.r_mode == MixMode::shared ? Tensor({i, i}) : Tensor({i, i, n});
  p.feature_mix = cfg.w_mode == MixMode::shared ? Tensor({i, p_in, p_out}) : Tensor({n, i, p_in, p_out});
  return p;
}

bool per_node(const Tensor& graph_mix_or_w, std::size_t shared_rank) {
  return graph_mix_or_w.rank() == shared_rank + 1;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

ParameterSet ParameterSet::zeros(const ModelConfig& cfg) {
  cfg.validate();
  ParameterSet p;
  for (std::size_t l = 0; l < cfg.n_layers(); ++l) {
    p.z_params.push_back(zero_layer(cfg, cfg.in_width(l), cfg.widths[l]));
    if (cfg.residual) p.x_params.push_back(zero_layer(cfg, cfg.in_features, cfg.widths[l]));
  }
  const std::size_t head_in = cfg.head == HeadMode::flatten ? cfg.i_count * cfg.widths.back() : cfg.widths.back();
  p.out_weights = Tensor({head_in, cfg.n_classes});
  p.out_bias = Tensor({cfg.n_classes});
  return p;
}

std::size_t ParameterSet::size() const {
  std::size_t total = 0;
  for_each([&](const std::string&, const Tensor& t) { total += t.size(); });
  return total;
}

ParameterSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ParameterSet p = ParameterSet::zeros(cfg);
  Rng rng = make_rng(seed, 0);
  auto uniform = [&](double bound) { return (2.0 * uniform01(rng) - 1.0) * bound; };
  const std::size_t i_count = cfg.i_count;

  auto init_layer = [&](LayerParams& layer) {
    for (double& c : layer.hop_coeffs.data) c = 1.0 / static_cast<double>(cfg.k_hop);
    const std::size_t per = per_node(layer.graph_mix, 2) ? cfg.n_nodes : 1;
    for (std::size_t a = 0; a < i_count; ++a)
      for (std::size_t b = 0; b < i_count; ++b)
        for (std::size_t n = 0; n < per; ++n)
          layer.graph_mix[(a * i_count + b) * per + n] = (a == b ? 1.0 : 0.0) + uniform(0.01);
    const auto& s = layer.feature_mix.shape;
    const double fan_in = static_cast<double>(s[s.size() - 2]);
    const double fan_out = static_cast<double>(s.back());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.feature_mix.data) w = uniform(bound);
  };
  for (auto& layer : p.z_params) init_layer(layer);
  for (auto& layer : p.x_params) init_layer(layer);
  const double bound = std::sqrt(6.0 / static_cast<double>(p.out_weights.shape[0] + p.out_weights.shape[1]));
  for (double& w : p.out_weights.data) w = uniform(bound);
  return p;
}

GraphTensor nam_forward(const GraphTensor& z_in, const AdjacencyPowerSet& powers, const Tensor& hop_coeffs) {
  const std::size_t i_count = z_in.n_graphs();
  require(hop_coeffs.rank() == 2 && hop_coeffs.shape[1] == i_count, "hop coefficients must be K x I");
  require(powers.n_graphs() == i_count, "graph count differs from tensor slices");
  require(powers.n_nodes == z_in.n_nodes(), "node count differs from adjacency");
  const std::size_t k_hop = hop_coeffs.shape[0];
  require(k_hop <= powers.k_hop, "not enough adjacency powers for k_hop");

  GraphTensor h(i_count, z_in.n_nodes(), z_in.width());
  for (std::size_t i = 0; i < i_count; ++i) {
    SparseMatrix combined = hop_coeffs[i] * powers.power(i, 1);
    for (std::size_t k = 2; k <= k_hop; ++k) combined += hop_coeffs[(k - 1) * i_count + i] * powers.power(i, k);
    h.slices[i].noalias() = combined * z_in.slices[i];
  }
  return h;
}

GraphTensor gam_forward(const GraphTensor& h, const Tensor& graph_mix) {
  const std::size_t i_count = h.n_graphs(), n = h.n_nodes();
  const bool node_wise = per_node(graph_mix, 2);
  require(graph_mix.shape[0] == i_count && graph_mix.shape[1] == i_count &&
              (!node_wise || graph_mix.shape[2] == n),
          "graph mixing tensor must be I x I or I x I x N");
  GraphTensor g(i_count, n, h.width());
  for (std::size_t a = 0; a < i_count; ++a)
    for (std::size_t b = 0; b < i_count; ++b) {
      if (node_wise) {
        ConstVectorMap r(graph_mix.data.data() + (a * i_count + b) * n, static_cast<Index>(n));
        g.slices[a].noalias() += r.asDiagonal() * h.slices[b];
      } else {
        g.slices[a].noalias() += graph_mix[a * i_count + b] * h.slices[b];
      }
    }
  return g;
}

GraphTensor fam_forward(const GraphTensor& g, const Tensor& feature_mix) {
  const std::size_t i_count = g.n_graphs(), n = g.n_nodes(), p_in = g.width();
  const bool node_wise = per_node(feature_mix, 3);
  const auto& s = feature_mix.shape;
  require(node_wise ? (s[0] == n && s[1] == i_count && s[2] == p_in)
                    : (s.size() == 3 && s[0] == i_count && s[1] == p_in),
          "feature mixing tensor shape does not match input");
  const std::size_t p_out = s.back();
  const auto rows = static_cast<Index>(p_in), cols = static_cast<Index>(p_out);
  GraphTensor z(i_count, n, p_out);
  for (std::size_t i = 0; i < i_count; ++i) {
    if (!node_wise) {
      ConstMatrixMap w(feature_mix.data.data() + i * p_in * p_out, rows, cols);
      z.slices[i].noalias() = g.slices[i] * w;
      continue;
    }
    for (std::size_t v = 0; v < n; ++v) {
      ConstMatrixMap w(feature_mix.data.data() + (v * i_count + i) * p_in * p_out, rows, cols);
      z.slices[i].row(static_cast<Index>(v)).noalias() = g.slices[i].row(static_cast<Index>(v)) * w;
    }
  }
  return z;
}

DiffusedInput diffuse_input(const FeatureMatrix& x, const AdjacencyPowerSet& powers) {
  require(powers.n_nodes == x.n_nodes(), "features and adjacency differ in node count");
  DiffusedInput out;
  out.hops.resize(powers.n_graphs());
  for (std::size_t i = 0; i < powers.n_graphs(); ++i)
    for (std::size_t k = 1; k <= powers.k_hop; ++k) out.hops[i].push_back(powers.power(i, k) * x.values);
  return out;
}

GraphTensor nam_forward(const DiffusedInput& input, const Tensor& hop_coeffs) {
  const std::size_t i_count = input.n_graphs();
  require(hop_coeffs.rank() == 2 && hop_coeffs.shape[1] == i_count, "hop coefficients must be K x I");
  const std::size_t k_hop = hop_coeffs.shape[0];
  require(i_count > 0 && k_hop <= input.hops[0].size(), "not enough diffused hops for k_hop");
  const RowMatrix& first = input.hops[0][0];
  GraphTensor h(i_count, static_cast<std::size_t>(first.rows()), static_cast<std::size_t>(first.cols()));
  for (std::size_t i = 0; i < i_count; ++i)
    for (std::size_t k = 1; k <= k_hop; ++k) h.slices[i].noalias() += hop_coeffs[(k - 1) * i_count + i] * input.hops[i][k - 1];
  return h;
}

namespace {

GraphTensor finish_branch(GraphTensor h, const LayerParams& p, BranchCache* cache) {
  GraphTensor g = gam_forward(h, p.graph_mix);
  GraphTensor z = fam_forward(g, p.feature_mix);
  if (cache) {
    cache->h = std::move(h);
    cache->g = std::move(g);
  }
  return z;
}

}  // namespace

GraphTensor branch_forward(const GraphTensor& z_in, const AdjacencyPowerSet& powers, const LayerParams& p,
                           BranchCache* cache) {
  return finish_branch(nam_forward(z_in, powers, p.hop_coeffs), p, cache);
}

GraphTensor branch_forward(const DiffusedInput& input, const LayerParams& p, BranchCache* cache) {
  return finish_branch(nam_forward(input, p.hop_coeffs), p, cache);
}

GraphTensor layer_forward(const GraphTensor* z_prev, const DiffusedInput& input, std::size_t layer,
                          const ParameterSet& params, const AdjacencyPowerSet& powers, const ModelConfig& cfg,
                          LayerCache* cache) {
  require(layer < params.z_params.size(), "layer index out of range");
  require(layer == 0 || z_prev, "layers after the first need the previous activation");
  const LayerParams& theta_z = params.z_params[layer];
  BranchCache* z_cache = cache ? &cache->z_branch : nullptr;
  GraphTensor pre = layer == 0 ? branch_forward(input, theta_z, z_cache)
                               : branch_forward(*z_prev, powers, theta_z, z_cache);
  if (cfg.residual) {
    require(layer < params.x_params.size(), "residual parameters missing");
    GraphTensor skip = branch_forward(input, params.x_params[layer], cache ? &cache->x_branch : nullptr);
    for (std::size_t i = 0; i < pre.n_graphs(); ++i) pre.slices[i] += skip.slices[i];
  }
  GraphTensor post = pre;
  for (auto& s : post.slices) s = s.cwiseMax(0.0);
  if (cache) cache->pre_nonlin = std::move(pre);
  return post;
}

RowMatrix output_logits(const GraphTensor& z_last, const Tensor& out_weights, const Tensor& bias, HeadMode head) {
  const std::size_t i_count = z_last.n_graphs(), p = z_last.width();
  require(out_weights.rank() == 2 && bias.rank() == 1 && bias.shape[0] == out_weights.shape[1],
          "head weights must be D x K with a K bias");
  const std::size_t k = out_weights.shape[1];
  const std::size_t expected_in = head == HeadMode::flatten ? i_count * p : p;
  require(out_weights.shape[0] == expected_in, "head input width mismatch");
  ConstMatrixMap w(out_weights.data.data(), static_cast<Index>(expected_in), static_cast<Index>(k));
  RowMatrix logits = RowMatrix::Zero(static_cast<Index>(z_last.n_nodes()), static_cast<Index>(k));
  if (head == HeadMode::flatten) {
    for (std::size_t i = 0; i < i_count; ++i)
      logits.noalias() += z_last.slices[i] * w.middleRows(static_cast<Index>(i * p), static_cast<Index>(p));
  } else {
    RowMatrix mean = RowMatrix::Zero(static_cast<Index>(z_last.n_nodes()), static_cast<Index>(p));
    for (const auto& s : z_last.slices) mean += s;
    mean /= static_cast<double>(i_count);
    logits.noalias() = mean * w;
  }
  logits.rowwise() += ConstVectorMap(bias.data.data(), static_cast<Index>(k)).transpose();
  return logits;
}

RowMatrix softmax_rows(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - top).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

RowMatrix output_forward(const GraphTensor& z_last, const Tensor& out_weights, const Tensor& bias, HeadMode head) {
  return softmax_rows(output_logits(z_last, out_weights, bias, head));
}

Activations model_forward(const FeatureMatrix& x, const AdjacencyPowerSet& powers, const ParameterSet& params,
                          const ModelConfig& cfg) {
  require(x.n_nodes() == cfg.n_nodes && x.n_features() == cfg.in_features, "features do not match model config");
  require(powers.k_hop >= cfg.k_hop, "not enough adjacency powers for k_hop");
  return model_forward(std::make_shared<const DiffusedInput>(diffuse_input(x, powers)), powers, params, cfg);
}

Activations model_forward(std::shared_ptr<const DiffusedInput> input, const AdjacencyPowerSet& powers,
                          const ParameterSet& params, const ModelConfig& cfg) {
  require(input && input->n_graphs() == cfg.i_count, "diffused input does not match model config");
  require(powers.n_graphs() == cfg.i_count && powers.n_nodes == cfg.n_nodes, "graphs do not match model config");
  Activations acts;
  acts.input = std::move(input);
  acts.layers.resize(cfg.n_layers());
  const GraphTensor* z = nullptr;
  for (std::size_t l = 0; l < cfg.n_layers(); ++l) {
    acts.layers[l].post_nonlin = layer_forward(z, *acts.input, l, params, powers, cfg, &acts.layers[l]);
    z = &acts.layers[l].post_nonlin;
  }
  acts.logits = output_logits(*z, params.out_weights, params.out_bias, cfg.head);
  acts.y_hat = softmax_rows(acts.logits);
  return acts;
}

void nam_backward(const GraphTensor& d_h, const DiffusedInput& input, Tensor& d_hop_coeffs) {
  const std::size_t i_count = d_h.n_graphs(), k_hop = d_hop_coeffs.shape[0];
  for (std::size_t i = 0; i < i_count; ++i)
    for (std::size_t k = 1; k <= k_hop; ++k)
      d_hop_coeffs[(k - 1) * i_count + i] += d_h.slices[i].cwiseProduct(input.hops[i][k - 1]).sum();
}

GraphTensor nam_backward(const GraphTensor& d_h, const GraphTensor& z_in, const AdjacencyPowerSet& powers,
                         const Tensor& hop_coeffs, Tensor& d_hop_coeffs, bool want_input_grad) {
  const std::size_t i_count = d_h.n_graphs(), k_hop = hop_coeffs.shape[0];
  GraphTensor d_z;
  if (want_input_grad) d_z = GraphTensor(i_count, z_in.n_nodes(), z_in.width());
  for (std::size_t i = 0; i < i_count; ++i)
    for (std::size_t k = 1; k <= k_hop; ++k) {
      const std::size_t idx = (k - 1) * i_count + i;
      const RowMatrix back = powers.power(i, k).transpose() * d_h.slices[i];
      d_hop_coeffs[idx] += back.cwiseProduct(z_in.slices[i]).sum();
      if (want_input_grad) d_z.slices[i].noalias() += hop_coeffs[idx] * back;
    }
  return d_z;
}

GraphTensor gam_backward(const GraphTensor& d_g, const GraphTensor& h, const Tensor& graph_mix,
                         Tensor& d_graph_mix) {
  const std::size_t i_count = d_g.n_graphs(), n = d_g.n_nodes();
  const bool node_wise = per_node(graph_mix, 2);
  GraphTensor d_h(i_count, n, h.width());
  for (std::size_t a = 0; a < i_count; ++a)
    for (std::size_t b = 0; b < i_count; ++b) {
      const std::size_t base = a * i_count + b;
      if (node_wise) {
        const Eigen::VectorXd per_row = d_g.slices[a].cwiseProduct(h.slices[b]).rowwise().sum();
        Eigen::Map<Eigen::VectorXd>(d_graph_mix.data.data() + base * n, static_cast<Index>(n)) += per_row;
        ConstVectorMap r(graph_mix.data.data() + base * n, static_cast<Index>(n));
        d_h.slices[b].noalias() += r.asDiagonal() * d_g.slices[a];
      } else {
        d_graph_mix[base] += d_g.slices[a].cwiseProduct(h.slices[b]).sum();
        d_h.slices[b].noalias() += graph_mix[base] * d_g.slices[a];
      }
    }
  return d_h;
}

GraphTensor fam_backward(const GraphTensor& d_z, const GraphTensor& g, const Tensor& feature_mix,
                         Tensor& d_feature_mix) {
  const std::size_t i_count = g.n_graphs(), n = g.n_nodes(), p_in = g.width();
  const std::size_t p_out = feature_mix.shape.back();
  const bool node_wise = per_node(feature_mix, 3);
  const auto rows = static_cast<Index>(p_in), cols = static_cast<Index>(p_out);
  GraphTensor d_g(i_count, n, p_in);
  for (std::size_t i = 0; i < i_count; ++i) {
    if (!node_wise) {
      const std::size_t off = i * p_in * p_out;
      ConstMatrixMap w(feature_mix.data.data() + off, rows, cols);
      MatrixMap(d_feature_mix.data.data() + off, rows, cols).noalias() += g.slices[i].transpose() * d_z.slices[i];
      d_g.slices[i].noalias() = d_z.slices[i] * w.transpose();
      continue;
    }
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t off = (v * i_count + i) * p_in * p_out;
      const auto r = static_cast<Index>(v);
      ConstMatrixMap w(feature_mix.data.data() + off, rows, cols);
      MatrixMap(d_feature_mix.data.data() + off, rows, cols).noalias() +=
          g.slices[i].row(r).transpose() * d_z.slices[i].row(r);
      d_g.slices[i].row(r).noalias() = d_z.slices[i].row(r) * w.transpose();
    }
  }
  return d_g;
}

namespace {

ParameterSet zeros_like(const ParameterSet& params) {
  ParameterSet out = params;
  out.for_each([](const std::string&, Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); });
  return out;
}

// Returns the gradient with respect to z_in when z_in is given.
GraphTensor branch_backward(const GraphTensor& d_out, const GraphTensor* z_in, const DiffusedInput& input,
                            const BranchCache& cache, const LayerParams& p, LayerParams& grad,
                            const AdjacencyPowerSet& powers) {
  GraphTensor d_g = fam_backward(d_out, cache.g, p.feature_mix, grad.feature_mix);
  GraphTensor d_h = gam_backward(d_g, cache.h, p.graph_mix, grad.graph_mix);
  if (!z_in) {
    nam_backward(d_h, input, grad.hop_coeffs);
    return {};
  }
  return nam_backward(d_h, *z_in, powers, p.hop_coeffs, grad.hop_coeffs, true);
}

}  // namespace

ParameterSet model_backward(const Activations& acts, const RowMatrix& d_logits, const ParameterSet& params,
                            const AdjacencyPowerSet& powers, const ModelConfig& cfg) {
  ParameterSet grad = zeros_like(params);
  const GraphTensor& z_last = acts.layers.back().post_nonlin;
  const std::size_t i_count = z_last.n_graphs(), p = z_last.width(), k = cfg.n_classes;
  const auto pk = static_cast<Index>(p), kk = static_cast<Index>(k);

  Eigen::Map<Eigen::VectorXd>(grad.out_bias.data.data(), kk) += d_logits.colwise().sum().transpose();
  ConstMatrixMap w(params.out_weights.data.data(), static_cast<Index>(params.out_weights.shape[0]), kk);
  MatrixMap dw(grad.out_weights.data.data(), static_cast<Index>(params.out_weights.shape[0]), kk);
  GraphTensor d_post(i_count, z_last.n_nodes(), p);
  if (cfg.head == HeadMode::flatten) {
    for (std::size_t i = 0; i < i_count; ++i) {
      const auto off = static_cast<Index>(i * p);
      dw.middleRows(off, pk).noalias() += z_last.slices[i].transpose() * d_logits;
      d_post.slices[i].noalias() = d_logits * w.middleRows(off, pk).transpose();
    }
  } else {
    RowMatrix mean = RowMatrix::Zero(static_cast<Index>(z_last.n_nodes()), pk);
    for (const auto& s : z_last.slices) mean += s;
    mean /= static_cast<double>(i_count);
    dw.noalias() += mean.transpose() * d_logits;
    const RowMatrix shared = (d_logits * w.transpose()) / static_cast<double>(i_count);
    for (auto& s : d_post.slices) s = shared;
  }

  for (std::size_t l = cfg.n_layers(); l-- > 0;) {
    const LayerCache& cache = acts.layers[l];
    GraphTensor d_pre = d_post;
    for (std::size_t i = 0; i < i_count; ++i)
      d_pre.slices[i] = (cache.pre_nonlin.slices[i].array() > 0.0).select(d_post.slices[i], 0.0);
    const GraphTensor* z_in = l == 0 ? nullptr : &acts.layers[l - 1].post_nonlin;
    if (cfg.residual)
      branch_backward(d_pre, nullptr, *acts.input, cache.x_branch, params.x_params[l], grad.x_params[l], powers);
    d_post = branch_backward(d_pre, z_in, *acts.input, cache.z_branch, params.z_params[l], grad.z_params[l], powers);
  }
  return grad;
}

}  // namespace edagcn
