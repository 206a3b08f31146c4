#include <doctest.h>

#include <cmath>
#include <numeric>

#include "edagcn/error.hpp"
#include "edagcn/gradcheck.hpp"
#include "edagcn/objective.hpp"
#include "edagcn/pipeline.hpp"
#include "support.hpp"

using namespace edagcn;
using namespace edagcn::test;

namespace {

RowMatrix rows2(std::initializer_list<std::initializer_list<double>> rows) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

AdjacencyPowerSet powers_of(const std::vector<Graph>& graphs, std::size_t k = 1) {
  return adjacency_powers(graphs, k);
}

ModelConfig one_layer(std::size_t n, std::size_t f, std::size_t k) {
  ModelConfig cfg;
  cfg.widths = {1};
  cfg.n_nodes = n;
  cfg.in_features = f;
  cfg.n_classes = k;
  cfg.residual = false;
  return cfg;
}

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

double max_abs(const ParameterSet& p) {
  double m = 0.0;
  p.for_each([&](const std::string&, const Tensor& t) {
    for (double v : t.data) m = std::max(m, std::abs(v));
  });
  return m;
}

// a + s * b, entrywise.
ParameterSet axpy(const ParameterSet& a, double s, const ParameterSet& b) {
  ParameterSet out = a;
  std::vector<const Tensor*> rhs;
  b.for_each([&](const std::string&, const Tensor& t) { rhs.push_back(&t); });
  std::size_t i = 0;
  out.for_each([&](const std::string&, Tensor& t) {
    for (std::size_t j = 0; j < t.size(); ++j) t.data[j] += s * rhs[i]->data[j];
    ++i;
  });
  return out;
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("cross entropy") {
    const LabelData labels = make_labels({0, 1}, {0, 1}, {}, {}, 2);
    const std::vector<NodeId> first{0}, both{0, 1};
    CHECK(cross_entropy(rows2({{1, 0}, {0, 1}}), labels, both) == 0.0);
    CHECK(cross_entropy(rows2({{0.5, 0.5}, {0, 1}}), labels, first) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(cross_entropy(rows2({{0.5, 0.5}, {0.75, 0.25}}), labels, both) == doctest::Approx(2.079442).epsilon(1e-6));
    CHECK(cross_entropy(rows2({{0, 1}, {0, 1}}), labels, first) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy(rows2({{1, 0}, {0, 1}}), labels, std::vector<NodeId>{}), ValidationError);
  }

  TEST_CASE("smoothness trace") {
    const Graph edge = make_graph(2, {{0, 1}});
    const RowMatrix y = rows2({{1, 0}, {1, 0}});
    CHECK(smoothness_reg(y, powers_of({edge})) == 2.0);
    CHECK(smoothness_reg(y, powers_of({Graph(2)})) == 0.0);

    const Graph g = random_graph(8, 0.4, 3);
    RowMatrix soft = RowMatrix::Random(8, 3).cwiseAbs();
    const double single = smoothness_reg(soft, powers_of({g}));
    CHECK(smoothness_reg(soft, powers_of({g, g, g})) == doctest::Approx(3.0 * single).epsilon(1e-14));
    // The Laplacian form is a sum of squared differences across edges.
    double oracle = 0.0;
    for (const Edge& e : g.edges()) oracle += (soft.row(e.u) - soft.row(e.v)).squaredNorm();
    CHECK(smoothness_reg(soft, powers_of({g}), SmoothnessForm::laplacian) == doctest::Approx(oracle).epsilon(1e-13));
  }

  TEST_CASE("weight decay and sparsity") {
    const ModelConfig cfg = one_layer(2, 1, 2);
    ParameterSet p = ParameterSet::zeros(cfg);
    CHECK(weight_decay_reg(p) == 0.0);
    CHECK(sparsity_reg(p) == 0.0);
    p.z_params[0].feature_mix.data = {3.0};
    CHECK(weight_decay_reg(p) == 9.0);
    p.out_weights.data = {1.0, -2.0};
    p.z_params[0].feature_mix.data = {0.0};
    CHECK(weight_decay_reg(p) == 5.0);
    p.z_params[0].graph_mix.data = {-0.5};
    p.out_bias.data = {7.0, 7.0};
    CHECK(weight_decay_reg(p) == 5.0);
    CHECK(sparsity_reg(p) == 0.5);

    ModelConfig three = cfg;
    three.i_count = 3;
    ParameterSet q = ParameterSet::zeros(three);
    for (std::size_t i = 0; i < 3; ++i) q.z_params[0].graph_mix.data[i * 3 + i] = 1.0;
    CHECK(sparsity_reg(q) == 3.0);
    ModelConfig two = cfg;
    two.i_count = 2;
    ParameterSet r = ParameterSet::zeros(two);
    r.z_params[0].graph_mix.data = {0.5, -0.5, 0.0, 0.0};
    CHECK(sparsity_reg(r) == 1.0);
  }

  TEST_CASE("hand-built two-node objective") {
    const Graph edge = make_graph(2, {{0, 1}});
    const AdjacencyPowerSet powers = powers_of({edge});
    const ModelConfig cfg = one_layer(2, 1, 2);
    ParameterSet p = ParameterSet::zeros(cfg);
    p.z_params[0].graph_mix.data = {1.0};
    p.out_weights.data = {3.0, 0.0};
    p.out_bias.data = {std::log(3.0), 0.0};
    FeatureMatrix ones;
    ones.values = rows2({{1}, {1}});
    const LabelData labels = make_labels({0, 1}, {0, 1}, {}, {}, 2);
    TrainConfig tc;
    tc.mu1 = 0.1;
    tc.mu2 = 0.01;
    tc.sparsity = 0.5;
    const LossBreakdown l = loss(p, ones, powers, labels, labels.train_mask, cfg, tc);
    // Both rows are softmax([ln 3, 0]) = [0.75, 0.25].
    const double ce = -std::log(0.75) - std::log(0.25);
    const double smooth = 2.0 * (0.75 * 0.75 + 0.25 * 0.25);
    CHECK(l.cross_entropy == doctest::Approx(ce).epsilon(1e-14));
    CHECK(l.smoothness == doctest::Approx(smooth).epsilon(1e-14));
    CHECK(l.weight_decay == 9.0);
    CHECK(l.sparsity == 1.0);
    CHECK(l.total == doctest::Approx(ce + 0.1 * smooth + 0.01 * 9.0 + 0.5).epsilon(1e-14));

    const LossBreakdown plain = loss(p, ones, powers, labels, labels.train_mask, cfg, TrainConfig{});
    CHECK(plain.total == plain.cross_entropy);
  }

  TEST_CASE("total reassembles from its parts") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Instance inst = gradcheck_instance(seed, MixMode::per_node, MixMode::shared, seed % 2 == 0);
      const LossBreakdown l = loss(inst.params, inst.x, inst.powers, inst.labels, inst.labels.train_mask,
                                   inst.model, inst.train);
      const double sum = l.cross_entropy + inst.train.mu1 * l.smoothness + inst.train.mu2 * l.weight_decay +
                         inst.train.sparsity * l.sparsity;
      CHECK(std::abs(l.total - sum) <= 1e-10 * std::abs(l.total));
    }
  }

  TEST_CASE("smoothness weight scales linearly") {
    const Instance inst = gradcheck_instance(2, MixMode::shared, MixMode::per_node, true);
    auto at = [&](double mu1) {
      TrainConfig tc = inst.train;
      tc.mu1 = mu1;
      return loss_and_gradient(inst.params, inst.x, inst.powers, inst.labels, inst.labels.train_mask, inst.model,
                               tc);
    };
    const LossAndGradient zero = at(0.0), one = at(0.05), two = at(0.1);
    CHECK((two.loss.total - zero.loss.total) ==
          doctest::Approx(2.0 * (one.loss.total - zero.loss.total)).epsilon(1e-12));
    const ParameterSet d1 = axpy(one.gradient, -1.0, zero.gradient);
    const ParameterSet d2 = axpy(two.gradient, -1.0, zero.gradient);
    CHECK(max_abs(axpy(d2, -2.0, d1)) <= 1e-12 * std::max(1.0, max_abs(d2)));
  }

  TEST_CASE("l1 subgradient") {
    const Graph edge = make_graph(2, {{0, 1}});
    const ModelConfig cfg = one_layer(2, 1, 2);
    ParameterSet p = ParameterSet::zeros(cfg);
    p.z_params[0].graph_mix.data = {-2.0};
    FeatureMatrix ones;
    ones.values = rows2({{1}, {1}});
    const LabelData labels = make_labels({0, 1}, {0, 1}, {}, {}, 2);
    TrainConfig tc;
    tc.sparsity = 0.3;
    // W = 0 blocks every data path into R, leaving only the penalty.
    const ParameterSet g = gradients(p, ones, powers_of({edge}), labels, labels.train_mask, cfg, tc);
    CHECK(g.z_params[0].graph_mix.data[0] == doctest::Approx(-0.3).epsilon(1e-15));
    p.z_params[0].graph_mix.data = {0.0};
    CHECK(gradients(p, ones, powers_of({edge}), labels, labels.train_mask, cfg, tc).z_params[0].graph_mix.data[0] ==
          0.0);
  }

  TEST_CASE("zero-gradient fixed point") {
    const Graph edge = make_graph(2, {{0, 1}});
    const AdjacencyPowerSet powers = powers_of({edge});
    const ModelConfig cfg = one_layer(2, 1, 2);
    const ParameterSet p = ParameterSet::zeros(cfg);
    FeatureMatrix ones;
    ones.values = rows2({{1}, {1}});
    const LabelData labels = make_labels({0, 1}, {0, 1}, {}, {}, 2);
    const auto mask = all_nodes(2);
    const ParameterSet g = gradients(p, ones, powers, labels, mask, cfg, TrainConfig{});
    const auto objective = [&](const ParameterSet& q) {
      return loss(q, ones, powers, labels, mask, cfg, TrainConfig{}).total;
    };
    ParameterSet probe = p;
    double biggest = 0.0;
    probe.for_each([&](const std::string&, Tensor& t) {
      for (double& v : t.data) {
        v = 1e-5;
        const double up = objective(probe);
        v = -1e-5;
        biggest = std::max(biggest, std::abs(up - objective(probe)) / 2.0);
        v = 0.0;
      }
    });
    CHECK(biggest <= 1e-12);
    CHECK(max_abs(g) <= 1e-10);
  }

  TEST_CASE("analytic gradient matches finite differences") {
    for (std::uint64_t seed = 0; seed < 4; ++seed)
      for (MixMode r : {MixMode::per_node, MixMode::shared})
        for (MixMode w : {MixMode::per_node, MixMode::shared})
          for (bool residual : {true, false}) {
            CAPTURE(seed);
            CAPTURE(residual);
            const GradCheckReport rep =
                check_instance_gradient(gradcheck_instance(seed, r, w, residual), 1e-5, 1e-4);
            CHECK_MESSAGE(rep.pass, rep.worst_parameter << " rel " << rep.max_rel_error);
            CHECK(rep.checked > 0);
          }
  }

  TEST_CASE("three-layer gradient") {
    Instance inst = gradcheck_instance(1, MixMode::per_node, MixMode::per_node, true);
    inst.model.widths = {4, 3, 3};
    inst.params = init_params(inst.model, 17);
    Rng rng = make_rng(17, 1);
    auto spread = [&](LayerParams& layer) {
      for (double& c : layer.hop_coeffs.data) c = 0.3 + 0.7 * uniform01(rng);
      for (double& v : layer.graph_mix.data) v = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.75 * uniform01(rng));
    };
    for (auto& l : inst.params.z_params) spread(l);
    for (auto& l : inst.params.x_params) spread(l);
    for (double& v : inst.params.out_weights.data) v *= 0.1;
    const GradCheckReport rep = check_instance_gradient(inst, 1e-5, 1e-4);
    CHECK_MESSAGE(rep.pass, rep.worst_parameter << " rel " << rep.max_rel_error);
  }

  TEST_CASE("grad_check on a quadratic") {
    ModelConfig cfg = one_layer(2, 2, 2);
    ParameterSet p = init_params(cfg, 3);
    // f(p) = sum over entries of (j + 1) v^2 / 2, so df/dv = (j + 1) v.
    const auto objective = [](const ParameterSet& q) {
      double f = 0.0;
      q.for_each([&](const std::string&, const Tensor& t) {
        for (std::size_t j = 0; j < t.size(); ++j) f += 0.5 * static_cast<double>(j + 1) * t.data[j] * t.data[j];
      });
      return f;
    };
    p.out_bias.data = {0.4, -0.7};
    ParameterSet grad = p;
    grad.for_each([](const std::string&, Tensor& t) {
      for (std::size_t j = 0; j < t.size(); ++j) t.data[j] *= static_cast<double>(j + 1);
    });
    const GradCheckReport ok = grad_check(p, grad, objective, 1e-5, 1e-4);
    CHECK(ok.pass);
    CHECK(ok.max_rel_error < 1e-8);

    grad.out_bias.data[1] *= 2.0;
    const GradCheckReport bad = grad_check(p, grad, objective, 1e-5, 1e-4);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_parameter == "out.b[1]");
    CHECK(bad.worst_tensor == "out.b");
    CHECK(bad.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
  }

  TEST_CASE("corrupted instance gradient is caught") {
    const GradCheckReport rep =
        check_instance_gradient(gradcheck_instance(0, MixMode::per_node, MixMode::per_node, true), 1e-5, 1e-4, true);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_rel_error == doctest::Approx(0.5).epsilon(1e-3));
  }
}
