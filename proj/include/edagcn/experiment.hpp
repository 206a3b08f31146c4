#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edagcn/dither.hpp"
#include "edagcn/perturb.hpp"
#include "edagcn/pipeline.hpp"

namespace edagcn {

struct DataPaths {
  std::vector<std::filesystem::path> edges;  // more than one file: multi-relational input
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> splits;
  std::optional<std::filesystem::path> attacked_edges;
  std::optional<std::filesystem::path> attack_manifest;
  std::optional<std::size_t> n_nodes;
};

enum class AttackKind { random, targeted };

struct AttackSpec {
  AttackKind kind = AttackKind::random;
  std::size_t count = 0;   // random: edges inserted
  std::size_t budget = 1;  // targeted: edges per target
  std::vector<NodeId> targets;
};

/// One run of the pipeline. Graph source precedence: sbm, then knn, then
/// data.edges. Role seeds are derived from `seed`; the per-module seed
/// fields inside `dither`, `train` and `noise` are overwritten by resolve().
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  DataPaths data;
  std::optional<SbmSpec> sbm;
  std::vector<std::size_t> knn;  // one graph per k, built from the (clean) features
  bool dither_enabled = true;
  DitherConfig dither;
  ModelSettings model;
  TrainConfig train;
  std::optional<NoiseConfig> noise;
  AttackSpec attack;
  NodeId probe_node = 0;
  std::size_t probe_trials = 10000;
  std::string sweep_axis = "i_count";
  std::vector<double> sweep_values;
  std::size_t sweep_seeds = 1;

  /// Fills derived seeds and checks cross-field constraints.
  ExperimentConfig resolved() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);

/// FNV-1a of the compact JSON dump of the config, output directory excluded.
std::string config_hash(const ExperimentConfig& cfg);

struct Dataset {
  FeatureMatrix x;
  std::vector<Graph> observed;  // after any attack
  std::optional<Graph> clean;   // known only for synthetic or manifest-backed data
  LabelData labels;
  std::vector<std::string> warnings;
};

/// Loads or generates the data and applies the configured attack.
Dataset load_dataset(const ExperimentConfig& cfg);

/// Graphs fed to the model: dithered copies of a single observed graph, or
/// the observed graphs as given; Gaussian noise applied when configured.
struct PreparedInput {
  FeatureMatrix x;
  std::vector<Graph> graphs;  // empty when adjacency noise made them weighted
  AdjacencyPowerSet powers;
};

PreparedInput prepare_input(const ExperimentConfig& cfg, const Dataset& data, std::size_t threads = 1);

RunResult run_experiment(const ExperimentConfig& cfg, const EpochCallback& on_epoch = {});

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::vector<std::uint64_t> seeds;
  double accuracy = 0.0;  // mean over seeds
  double macro_f1 = 0.0;
};

/// Runs are independent and fan out over up to `threads` workers; rows come
/// back in the order of `cfg.sweep_values`.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, std::size_t threads = 1);

/// Applies `value` to the named axis: q1, q2, i_count or inserted_edges.
ExperimentConfig with_axis_value(const ExperimentConfig& cfg, const std::string& axis, double value);

}  // namespace edagcn
