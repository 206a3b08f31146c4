#pragma once

#include <cstdint>
#include <vector>

#include "edagcn/adjacency.hpp"
#include "edagcn/gradcheck.hpp"
#include "edagcn/model.hpp"
#include "edagcn/trainer.hpp"

namespace edagcn {

/// Model choices that do not depend on the data. Data-derived sizes are
/// filled in by resolve().
struct ModelSettings {
  std::vector<std::size_t> widths;  // empty: {64, 8, n_classes}
  std::size_t k_hop = 1;
  MixMode r_mode = MixMode::shared;
  MixMode w_mode = MixMode::shared;
  bool residual = true;
  HeadMode head = HeadMode::flatten;
  Normalization normalization = Normalization::none;

  ModelConfig resolve(std::size_t n_nodes, std::size_t in_features, std::size_t n_classes,
                      std::size_t i_count) const;
};

struct RunResult {
  ModelConfig model;
  TrainResult training;
  Evaluation test;
};

RunResult train_and_test(const FeatureMatrix& x, const AdjacencyPowerSet& graphs, const LabelData& labels,
                         const ModelSettings& settings, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// A fully specified small problem with explicit parameters.
struct Instance {
  FeatureMatrix x;
  std::vector<Graph> graphs;
  AdjacencyPowerSet powers;
  LabelData labels;
  ModelConfig model;
  TrainConfig train;
  ParameterSet params;
};

/// N = 12, I = 3 dithered graphs, K_hop = 2, L = 2 (widths 4, 3), F = 5,
/// three classes, all three regularizers active, and parameters moved away
/// from initialization (R entries bounded away from the l1 kink).
Instance gradcheck_instance(std::uint64_t seed, MixMode r_mode, MixMode w_mode, bool residual);

/// Analytic gradient of `inst` checked against central differences. With
/// `corrupt`, the largest-magnitude gradient entry is doubled first.
GradCheckReport check_instance_gradient(const Instance& inst, double step, double tolerance,
                                        bool corrupt = false);

/// Two-block planted partition with block labels, identity features and
/// random cross-block edge insertions.
struct SbmExperiment {
  Graph clean;
  Graph perturbed;
  std::vector<int> block;
  FeatureMatrix x;
  LabelData labels;
};

struct SbmSpec {
  std::size_t nodes_per_block = 100;
  double p_in = 0.10;
  double p_out = 0.01;
  std::size_t inserted_edges = 50;
  double train_fraction = 0.10;  // per block
  double val_fraction = 0.10;    // per block; the rest is test
};

SbmExperiment make_sbm_experiment(const SbmSpec& spec, std::uint64_t seed);

}  // namespace edagcn
