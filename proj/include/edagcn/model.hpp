#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "edagcn/adjacency.hpp"
#include "edagcn/data.hpp"
#include "edagcn/tensor.hpp"

namespace edagcn {

enum class MixMode { per_node, shared };
enum class HeadMode { flatten, average };

struct ModelConfig {
  std::vector<std::size_t> widths;  // P(1)..P(L); the layer count is widths.size()
  std::size_t k_hop = 1;
  std::size_t i_count = 1;
  std::size_t n_nodes = 0;
  std::size_t in_features = 0;
  std::size_t n_classes = 0;
  MixMode r_mode = MixMode::shared;
  MixMode w_mode = MixMode::shared;
  bool residual = true;
  HeadMode head = HeadMode::flatten;

  std::size_t n_layers() const noexcept { return widths.size(); }
  /// Width consumed by layer l (0-based).
  std::size_t in_width(std::size_t l) const { return l == 0 ? in_features : widths.at(l - 1); }
  void validate() const;
};

/// Parameters of one f = FAM o GAM o NAM map.
///
///   hop_coeffs   [K_hop][I]                          C
///   graph_mix    [I][I] (shared) or [I][I][N]        R, element (i, i', n)
///   feature_mix  [I][P_in][P_out] (shared) or
///                [N][I][P_in][P_out] (per node)      W
///
/// The sharing mode is read off the tensor rank.
struct LayerParams {
  Tensor hop_coeffs;
  Tensor graph_mix;
  Tensor feature_mix;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ParameterSet {
  std::vector<LayerParams> z_params;
  std::vector<LayerParams> x_params;  // empty unless residual
  Tensor out_weights;                 // [I*P(L)][K] (flatten) or [P(L)][K] (average)
  Tensor out_bias;                    // [K]

  /// All-zero parameters with the shapes implied by cfg.
  static ParameterSet zeros(const ModelConfig& cfg);

  /// Visits every tensor in a fixed order with a stable name ("z1.C", "x2.R", "out.W", ...).
  template <class F>
  void for_each(F&& f) {
    for_each_impl(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    for_each_impl(*this, f);
  }

  std::size_t size() const;
  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  template <class Self, class F>
  static void for_each_impl(Self& self, F& f) {
    auto visit_layers = [&](auto& layers, char prefix) {
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string stem = std::string(1, prefix) + std::to_string(l + 1);
        f(stem + ".C", layers[l].hop_coeffs);
        f(stem + ".R", layers[l].graph_mix);
        f(stem + ".W", layers[l].feature_mix);
      }
    };
    visit_layers(self.z_params, 'z');
    visit_layers(self.x_params, 'x');
    f(std::string("out.W"), self.out_weights);
    f(std::string("out.b"), self.out_bias);
  }
};

/// Cached intermediates of one f map.
struct BranchCache {
  GraphTensor h;  // after NAM
  GraphTensor g;  // after GAM
};

struct LayerCache {
  BranchCache z_branch;
  BranchCache x_branch;
  GraphTensor pre_nonlin;
  GraphTensor post_nonlin;
};

/// The raw input pushed through every adjacency power once: hops[i][k-1] =
/// A_i^k X. Layer 1 and every skip branch start from these, so they are
/// computed once per graph set instead of once per branch and epoch.
struct DiffusedInput {
  std::vector<std::vector<RowMatrix>> hops;

  std::size_t n_graphs() const noexcept { return hops.size(); }
};

DiffusedInput diffuse_input(const FeatureMatrix& x, const AdjacencyPowerSet& powers);

struct Activations {
  std::shared_ptr<const DiffusedInput> input;
  std::vector<LayerCache> layers;
  RowMatrix logits;
  RowMatrix y_hat;  // N x K, rows are probability vectors
};

/// Deterministic initialization: C = 1/K_hop, R = identity + U(-0.01, 0.01),
/// W and the head drawn from U(-b, b) with b = sqrt(6 / (fan_in + fan_out)),
/// bias zero.
ParameterSet init_params(const ModelConfig& cfg, std::uint64_t seed);

/// h[:, i] = sum_k C(k, i) A_i^k z[:, i].
GraphTensor nam_forward(const GraphTensor& z_in, const AdjacencyPowerSet& powers,
                        const Tensor& hop_coeffs);
/// g[n, i] = sum_i' R(i, i'[, n]) h[n, i'].
GraphTensor gam_forward(const GraphTensor& h, const Tensor& graph_mix);
/// z[n, i, p] = <g[n, i], w(n?, i, :, p)>.
GraphTensor fam_forward(const GraphTensor& g, const Tensor& feature_mix);

/// NAM applied to X replicated over the slices, read from the precomputed hops.
GraphTensor nam_forward(const DiffusedInput& input, const Tensor& hop_coeffs);

/// The composed map f(z; theta) for one parameter block, optionally caching h and g.
GraphTensor branch_forward(const GraphTensor& z_in, const AdjacencyPowerSet& powers,
                           const LayerParams& p, BranchCache* cache = nullptr);
GraphTensor branch_forward(const DiffusedInput& input, const LayerParams& p, BranchCache* cache = nullptr);

/// Layer l (0-based): ReLU(f(z_prev; theta_z) + [residual] f(X_rep; theta_x)).
/// At l = 0 the previous activation is X itself, so z_prev may be null and
/// the theta_z branch reads the diffused input too.
GraphTensor layer_forward(const GraphTensor* z_prev, const DiffusedInput& input, std::size_t layer,
                          const ParameterSet& params, const AdjacencyPowerSet& powers,
                          const ModelConfig& cfg, LayerCache* cache = nullptr);

/// Affine head over the per-node features followed by a row softmax.
RowMatrix output_logits(const GraphTensor& z_last, const Tensor& out_weights, const Tensor& bias,
                        HeadMode head = HeadMode::flatten);
RowMatrix output_forward(const GraphTensor& z_last, const Tensor& out_weights, const Tensor& bias,
                         HeadMode head = HeadMode::flatten);

/// Row-wise softmax with max subtraction.
RowMatrix softmax_rows(const RowMatrix& logits);

Activations model_forward(const FeatureMatrix& x, const AdjacencyPowerSet& powers,
                          const ParameterSet& params, const ModelConfig& cfg);
Activations model_forward(std::shared_ptr<const DiffusedInput> input, const AdjacencyPowerSet& powers,
                          const ParameterSet& params, const ModelConfig& cfg);

/// Reverse pass: gradient of a scalar objective with respect to every
/// parameter, given its gradient with respect to the logits.
ParameterSet model_backward(const Activations& acts, const RowMatrix& d_logits,
                            const ParameterSet& params, const AdjacencyPowerSet& powers,
                            const ModelConfig& cfg);

/// Reverse passes of the three stages. Each accumulates into the parameter
/// gradient and returns the gradient with respect to its input.
GraphTensor nam_backward(const GraphTensor& d_h, const GraphTensor& z_in,
                         const AdjacencyPowerSet& powers, const Tensor& hop_coeffs,
                         Tensor& d_hop_coeffs, bool want_input_grad = true);
/// Hop-coefficient gradient for the diffused-input form.
void nam_backward(const GraphTensor& d_h, const DiffusedInput& input, Tensor& d_hop_coeffs);
GraphTensor gam_backward(const GraphTensor& d_g, const GraphTensor& h, const Tensor& graph_mix,
                         Tensor& d_graph_mix);
GraphTensor fam_backward(const GraphTensor& d_z, const GraphTensor& g, const Tensor& feature_mix,
                         Tensor& d_feature_mix);

}  // namespace edagcn
