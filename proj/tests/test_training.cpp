#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "edagcn/checkpoint.hpp"
#include "edagcn/error.hpp"
#include "edagcn/metrics.hpp"
#include "edagcn/optimizer.hpp"
#include "edagcn/pipeline.hpp"
#include "edagcn/trainer.hpp"
#include "support.hpp"

using namespace edagcn;
using namespace edagcn::test;

namespace {

ParameterSet scalar_params(double value) {
  ParameterSet p;
  p.out_weights = Tensor({1});
  p.out_weights.data = {value};
  p.out_bias = Tensor({1});
  return p;
}

// Two clusters on a 6-node graph, separable by the first feature.
struct Toy {
  FeatureMatrix x;
  std::vector<Graph> graphs;
  AdjacencyPowerSet powers;
  LabelData labels;
  ModelConfig model;
};

Toy separable_toy() {
  Toy t;
  t.x.values.resize(6, 2);
  t.x.values << 1.0, 0.1, 0.9, 0.0, 1.0, 0.2, 0.0, 1.0, 0.1, 0.9, 0.2, 1.0;
  t.graphs = {make_graph(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}})};
  t.powers = adjacency_powers(t.graphs, 1);
  t.labels = make_labels({0, 0, 0, 1, 1, 1}, {0, 1, 3, 4}, {2, 5}, {}, 2);
  ModelSettings s;
  s.widths = {4};
  t.model = s.resolve(6, 2, 2, 1);
  return t;
}

// Confusion counts straight from the definition, averaged over present classes.
double oracle_macro_f1(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    int tp = 0, fp = 0, fn = 0;
    bool seen = false;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      seen = seen || truth[j] == c || pred[j] == c;
      tp += truth[j] == c && pred[j] == c;
      fp += truth[j] != c && pred[j] == c;
      fn += truth[j] == c && pred[j] != c;
    }
    if (!seen) continue;
    ++present;
    if (tp > 0) sum += 2.0 * tp / (2.0 * tp + fp + fn);
  }
  return present ? sum / present : 0.0;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("zero gradient leaves parameters alone") {
    const ModelConfig cfg = separable_toy().model;
    ParameterSet p = init_params(cfg, 5);
    const ParameterSet before = p;
    OptimizerState state = OptimizerState::for_params(p);
    adam_step(p, ParameterSet::zeros(cfg), state, 0.01);
    CHECK(p == before);
    CHECK(state.step_count == 1);
  }

  TEST_CASE("first step has unit size") {
    ParameterSet p = scalar_params(0.0);
    ParameterSet g = scalar_params(1.0);
    OptimizerState state = OptimizerState::for_params(p);
    adam_step(p, g, state, 0.1);
    CHECK(p.out_weights.data[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    CHECK(state.second_moment.out_weights.data[0] >= 0.0);
  }

  TEST_CASE("descends a convex quadratic") {
    ParameterSet p = scalar_params(3.0);
    OptimizerState state = OptimizerState::for_params(p);
    double previous = 9.0;
    for (int t = 0; t < 2; ++t) {
      adam_step(p, scalar_params(2.0 * p.out_weights.data[0]), state, 0.1);
      const double value = p.out_weights.data[0] * p.out_weights.data[0];
      CHECK(value < previous);
      previous = value;
    }
  }

  TEST_CASE("shape mismatch") {
    ParameterSet p = scalar_params(0.0);
    OptimizerState state = OptimizerState::for_params(p);
    ParameterSet g = scalar_params(0.0);
    g.out_weights = Tensor({2});
    CHECK_THROWS_AS(adam_step(p, g, state, 0.1), ShapeError);
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("perfect predictions") {
    const LabelData labels = make_labels({0, 1, 2}, {0, 1, 2}, {}, {}, 3);
    RowMatrix y = RowMatrix::Identity(3, 3);
    const Evaluation e = evaluate(y, labels, labels.train_mask);
    CHECK(e.accuracy == 1.0);
    CHECK(e.macro_f1 == 1.0);
  }

  TEST_CASE("hand confusion") {
    const std::vector<int> truth{0, 1}, pred{0, 0};
    std::vector<double> per_class;
    CHECK(macro_f1(truth, pred, 2, &per_class) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(per_class[0] == doctest::Approx(2.0 / 3.0));
    CHECK(per_class[1] == 0.0);
  }

  TEST_CASE("ties go to the lowest class") {
    RowMatrix y(2, 3);
    y << 0.5, 0.5, 0.0, 0.2, 0.4, 0.4;
    CHECK(predict(y) == std::vector<int>{0, 1});
  }

  TEST_CASE("agrees with a confusion-count oracle") {
    Rng rng = make_rng(4, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const int classes = 2 + trial % 4;
      const std::size_t n = 5 + static_cast<std::size_t>(trial) * 3;
      std::vector<int> truth(n), pred(n);
      for (std::size_t j = 0; j < n; ++j) {
        truth[j] = static_cast<int>(rng() % static_cast<unsigned>(classes));
        pred[j] = rng() % 3 == 0 ? truth[j] : static_cast<int>(rng() % static_cast<unsigned>(classes));
      }
      CHECK(macro_f1(truth, pred, static_cast<std::size_t>(classes)) ==
            doctest::Approx(oracle_macro_f1(truth, pred, classes)).epsilon(1e-14));
    }
  }

  TEST_CASE("empty mask is rejected") {
    const LabelData labels = make_labels({0}, {0}, {}, {}, 1);
    CHECK_THROWS_AS(evaluate(RowMatrix::Ones(1, 1), labels, std::vector<NodeId>{}), ValidationError);
  }
}

TEST_SUITE("trainer") {
  TEST_CASE("separable toy reaches full train accuracy") {
    const Toy t = separable_toy();
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.es_metric = EarlyStopMetric::val_loss;
    cfg.learning_rate = 0.05;
    const TrainResult r = train(t.x, t.powers, t.labels, cfg, t.model);
    CHECK(evaluate(r.best_params, t.x, t.powers, t.labels, t.labels.train_mask, t.model).accuracy == 1.0);
    CHECK(r.history.back().train_loss.total < r.history.front().train_loss.total);
  }

  TEST_CASE("zero patience stops at the first stale epoch") {
    const Instance inst = gradcheck_instance(0, MixMode::shared, MixMode::shared, true);
    TrainConfig cfg;
    cfg.seed = 1;
    cfg.max_epochs = 50;
    cfg.patience = 0;
    const TrainResult r = train(inst.x, inst.powers, inst.labels, cfg, inst.model);
    std::size_t first_stale = r.history.size();
    double best = -1.0;
    for (std::size_t e = 0; e < r.history.size(); ++e) {
      if (r.history[e].val_accuracy > best) {
        best = r.history[e].val_accuracy;
      } else {
        first_stale = e;
        break;
      }
    }
    CHECK(r.history.size() == std::min<std::size_t>(first_stale + 1, 50));
  }

  TEST_CASE("best parameters carry the best recorded metric") {
    const Instance inst = gradcheck_instance(3, MixMode::per_node, MixMode::shared, true);
    for (EarlyStopMetric m : {EarlyStopMetric::val_accuracy, EarlyStopMetric::val_loss}) {
      TrainConfig cfg;
      cfg.seed = 2;
      cfg.max_epochs = 80;
      cfg.patience = 10;
      cfg.es_metric = m;
      const TrainResult r = train(inst.x, inst.powers, inst.labels, cfg, inst.model);
      for (const EpochRecord& rec : r.history) {
        if (m == EarlyStopMetric::val_accuracy)
          CHECK(rec.val_accuracy <= r.best_metric);
        else
          CHECK(rec.val_loss >= r.best_metric);
      }
      const double stored = m == EarlyStopMetric::val_accuracy ? r.history[r.best_epoch].val_accuracy
                                                                : r.history[r.best_epoch].val_loss;
      CHECK(stored == r.best_metric);
      CHECK(evaluate(r.best_params, inst.x, inst.powers, inst.labels, inst.labels.val_mask, inst.model).accuracy ==
            r.history[r.best_epoch].val_accuracy);
    }
  }

  TEST_CASE("training is reproducible") {
    const Toy t = separable_toy();
    TrainConfig cfg;
    cfg.seed = 9;
    cfg.max_epochs = 40;
    cfg.patience = 40;
    cfg.mu1 = 0.01;
    cfg.mu2 = 0.001;
    cfg.sparsity = 0.001;
    std::vector<double> streamed;
    const TrainResult a = train(t.x, t.powers, t.labels, cfg, t.model,
                                [&](const EpochRecord& rec) { streamed.push_back(rec.train_loss.total); });
    const TrainResult b = train(t.x, t.powers, t.labels, cfg, t.model);
    REQUIRE(a.history.size() == b.history.size());
    CHECK(streamed.size() == a.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
      CHECK(a.history[e].train_loss.total == b.history[e].train_loss.total);
      CHECK(a.history[e].val_loss == b.history[e].val_loss);
    }
    CHECK(a.best_params == b.best_params);
  }

  TEST_CASE("non-finite loss raises") {
    Toy t = separable_toy();
    t.x.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.patience = 5;
    CHECK_THROWS_AS(train(t.x, t.powers, t.labels, cfg, t.model), NumericError);
  }

  TEST_CASE("masks and config are validated") {
    Toy t = separable_toy();
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.patience = 6;
    CHECK_THROWS_AS(train(t.x, t.powers, t.labels, cfg, t.model), ValidationError);
    cfg.patience = 1;
    t.labels = make_labels({0, 0, 0, 1, 1, 1}, {0, 1, 3, 4}, {}, {}, 2);
    CHECK_THROWS_AS(train(t.x, t.powers, t.labels, cfg, t.model), ValidationError);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip") {
    TempDir dir("ckpt");
    for (MixMode mode : {MixMode::per_node, MixMode::shared}) {
      ModelSettings s;
      s.widths = {3, 2};
      s.k_hop = 2;
      s.r_mode = mode;
      s.w_mode = mode;
      s.head = mode == MixMode::shared ? HeadMode::average : HeadMode::flatten;
      const ModelConfig cfg = s.resolve(5, 4, 3, 2);
      const Checkpoint ck{cfg, init_params(cfg, 77), "feedface"};
      save_checkpoint(dir / "c.json", ck);
      const Checkpoint back = load_checkpoint(dir / "c.json", cfg);
      CHECK(back.params == ck.params);
      CHECK(back.config_hash == "feedface");
      CHECK(to_json(back.config) == to_json(cfg));
    }
  }

  TEST_CASE("shape mismatches are rejected") {
    TempDir dir("ckpt_bad");
    ModelSettings s;
    s.widths = {3};
    const ModelConfig cfg = s.resolve(4, 2, 2, 1);
    save_checkpoint(dir / "c.json", {cfg, init_params(cfg, 1), ""});

    ModelConfig other = cfg;
    other.widths = {5};
    CHECK_THROWS_AS(load_checkpoint(dir / "c.json", other), ShapeError);

    auto doc = nlohmann::json::parse(read_file(dir / "c.json"));
    doc["tensors"][0]["shape"] = {9, 9};
    write_file(dir / "d.json", doc.dump());
    CHECK_THROWS_AS(load_checkpoint(dir / "d.json"), ShapeError);

    write_file(dir / "e.json", "{not json");
    CHECK_THROWS_AS(load_checkpoint(dir / "e.json"), ParseError);
  }
}
