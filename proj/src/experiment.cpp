#include "edagcn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <thread>
#include <utility>

#include "edagcn/error.hpp"
#include "edagcn/io.hpp"
#include "edagcn/rng.hpp"

namespace edagcn {

using nlohmann::json;

namespace {

// Seed roles. Each run seed fans out to independent streams per module.
constexpr std::uint64_t kDitherStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kAttackStream = 4;
constexpr std::uint64_t kSbmStream = 5;

template <class E>
using EnumTable = std::initializer_list<std::pair<E, const char*>>;

const EnumTable<MixMode> kMixModes = {{MixMode::per_node, "per_node"}, {MixMode::shared, "shared"}};
const EnumTable<HeadMode> kHeads = {{HeadMode::flatten, "flatten"}, {HeadMode::average, "average"}};
const EnumTable<Normalization> kNorms = {{Normalization::none, "none"}, {Normalization::symmetric, "symmetric"}};
const EnumTable<EarlyStopMetric> kMetrics = {{EarlyStopMetric::val_accuracy, "val_accuracy"},
                                             {EarlyStopMetric::val_loss, "val_loss"}};
const EnumTable<SmoothnessForm> kSmoothness = {{SmoothnessForm::adjacency, "adjacency"},
                                               {SmoothnessForm::laplacian, "laplacian"}};
const EnumTable<NoiseTarget> kTargets = {{NoiseTarget::features, "features"}, {NoiseTarget::adjacency, "adjacency"}};
const EnumTable<AttackKind> kAttacks = {{AttackKind::random, "random"}, {AttackKind::targeted, "targeted"}};

template <class E>
const char* enum_name(E value, EnumTable<E> table) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <class E>
E enum_value(const json& j, const std::string& key, EnumTable<E> table) {
  const std::string s = j.get<std::string>();
  for (const auto& [v, name] : table)
    if (s == name) return v;
  throw ValidationError("unknown value \"" + s + "\" for " + key);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ValidationError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class E>
void read_enum(const json& j, const char* key, E& out, EnumTable<E> table) {
  if (j.contains(key)) out = enum_value(j.at(key), key, table);
}

void read_path(const json& j, const char* key, std::optional<std::filesystem::path>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
}

json path_or_null(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->generic_string()) : json(nullptr);
}

std::size_t to_count(double value, const std::string& axis) {
  if (!(value >= 0.0) || value != std::floor(value))
    throw ValidationError(axis + " values must be nonnegative integers");
  return static_cast<std::size_t>(value);
}

}  // namespace

json to_json(const TrainConfig& cfg) {
  return {{"mu1", cfg.mu1},
          {"mu2", cfg.mu2},
          {"lambda", cfg.sparsity},
          {"learning_rate", cfg.learning_rate},
          {"max_epochs", cfg.max_epochs},
          {"patience", cfg.patience},
          {"es_metric", enum_name(cfg.es_metric, kMetrics)},
          {"smoothness", enum_name(cfg.smoothness, kSmoothness)}};
}

json to_json(const ExperimentConfig& cfg) {
  json edges = json::array();
  for (const auto& p : cfg.data.edges) edges.push_back(p.generic_string());
  json j;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out.generic_string();
  j["data"] = {{"edges", edges},
               {"features", path_or_null(cfg.data.features)},
               {"labels", path_or_null(cfg.data.labels)},
               {"splits", path_or_null(cfg.data.splits)},
               {"attacked_edges", path_or_null(cfg.data.attacked_edges)},
               {"attack_manifest", path_or_null(cfg.data.attack_manifest)},
               {"n_nodes", cfg.data.n_nodes ? json(*cfg.data.n_nodes) : json(nullptr)}};
  if (cfg.sbm)
    j["sbm"] = {{"nodes_per_block", cfg.sbm->nodes_per_block},
                {"p_in", cfg.sbm->p_in},
                {"p_out", cfg.sbm->p_out},
                {"inserted_edges", cfg.sbm->inserted_edges},
                {"train_fraction", cfg.sbm->train_fraction},
                {"val_fraction", cfg.sbm->val_fraction}};
  else
    j["sbm"] = nullptr;
  j["knn"] = cfg.knn;
  j["dither"] = {{"enabled", cfg.dither_enabled},
                 {"q1", cfg.dither.q1},
                 {"q2", cfg.dither.q2},
                 {"i_count", cfg.dither.i_count}};
  j["model"] = {{"widths", cfg.model.widths},
                {"k_hop", cfg.model.k_hop},
                {"r_mode", enum_name(cfg.model.r_mode, kMixModes)},
                {"w_mode", enum_name(cfg.model.w_mode, kMixModes)},
                {"residual", cfg.model.residual},
                {"head", enum_name(cfg.model.head, kHeads)},
                {"normalization", enum_name(cfg.model.normalization, kNorms)}};
  j["train"] = to_json(cfg.train);
  if (cfg.noise)
    j["noise"] = {{"snr", cfg.noise->snr}, {"target", enum_name(cfg.noise->target, kTargets)}};
  else
    j["noise"] = nullptr;
  j["attack"] = {{"kind", enum_name(cfg.attack.kind, kAttacks)},
                 {"count", cfg.attack.count},
                 {"budget", cfg.attack.budget},
                 {"targets", cfg.attack.targets}};
  j["probe"] = {{"node", cfg.probe_node}, {"trials", cfg.probe_trials}};
  j["sweep"] = {{"axis", cfg.sweep_axis}, {"values", cfg.sweep_values}, {"seeds", cfg.sweep_seeds}};
  j["derived_seeds"] = {{"dither", cfg.dither.seed},
                        {"train", cfg.train.seed},
                        {"noise", cfg.noise ? json(cfg.noise->seed) : json(nullptr)},
                        {"attack", derive_seed(cfg.seed, kAttackStream)},
                        {"sbm", derive_seed(cfg.seed, kSbmStream)}};
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j, {"seed", "out", "data", "sbm", "knn", "dither", "model", "train", "noise", "attack", "probe", "sweep",
                 "derived_seeds", "config_hash"},
             "config");
  ExperimentConfig cfg;
  try {
    read(j, "seed", cfg.seed);
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();

    if (j.contains("data")) {
      const json& d = j.at("data");
      check_keys(d, {"edges", "features", "labels", "splits", "attacked_edges", "attack_manifest", "n_nodes"}, "data");
      if (d.contains("edges")) {
        const json& e = d.at("edges");
        if (e.is_string())
          cfg.data.edges.emplace_back(e.get<std::string>());
        else
          for (const auto& p : e) cfg.data.edges.emplace_back(p.get<std::string>());
      }
      read_path(d, "features", cfg.data.features);
      read_path(d, "labels", cfg.data.labels);
      read_path(d, "splits", cfg.data.splits);
      read_path(d, "attacked_edges", cfg.data.attacked_edges);
      read_path(d, "attack_manifest", cfg.data.attack_manifest);
      read(d, "n_nodes", cfg.data.n_nodes);
    }
    if (j.contains("sbm") && !j.at("sbm").is_null()) {
      const json& s = j.at("sbm");
      check_keys(s, {"nodes_per_block", "p_in", "p_out", "inserted_edges", "train_fraction", "val_fraction"}, "sbm");
      SbmSpec spec;
      read(s, "nodes_per_block", spec.nodes_per_block);
      read(s, "p_in", spec.p_in);
      read(s, "p_out", spec.p_out);
      read(s, "inserted_edges", spec.inserted_edges);
      read(s, "train_fraction", spec.train_fraction);
      read(s, "val_fraction", spec.val_fraction);
      cfg.sbm = spec;
    }
    read(j, "knn", cfg.knn);
    if (j.contains("dither")) {
      const json& d = j.at("dither");
      check_keys(d, {"enabled", "q1", "q2", "i_count"}, "dither");
      read(d, "enabled", cfg.dither_enabled);
      read(d, "q1", cfg.dither.q1);
      read(d, "q2", cfg.dither.q2);
      read(d, "i_count", cfg.dither.i_count);
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, {"widths", "k_hop", "r_mode", "w_mode", "residual", "head", "normalization"}, "model");
      read(m, "widths", cfg.model.widths);
      read(m, "k_hop", cfg.model.k_hop);
      read_enum(m, "r_mode", cfg.model.r_mode, kMixModes);
      read_enum(m, "w_mode", cfg.model.w_mode, kMixModes);
      read(m, "residual", cfg.model.residual);
      read_enum(m, "head", cfg.model.head, kHeads);
      read_enum(m, "normalization", cfg.model.normalization, kNorms);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t, {"mu1", "mu2", "lambda", "learning_rate", "max_epochs", "patience", "es_metric", "smoothness"},
                 "train");
      read(t, "mu1", cfg.train.mu1);
      read(t, "mu2", cfg.train.mu2);
      read(t, "lambda", cfg.train.sparsity);
      read(t, "learning_rate", cfg.train.learning_rate);
      read(t, "max_epochs", cfg.train.max_epochs);
      read(t, "patience", cfg.train.patience);
      read_enum(t, "es_metric", cfg.train.es_metric, kMetrics);
      read_enum(t, "smoothness", cfg.train.smoothness, kSmoothness);
    }
    if (j.contains("noise") && !j.at("noise").is_null()) {
      const json& n = j.at("noise");
      check_keys(n, {"snr", "target"}, "noise");
      NoiseConfig noise;
      read(n, "snr", noise.snr);
      read_enum(n, "target", noise.target, kTargets);
      cfg.noise = noise;
    }
    if (j.contains("attack")) {
      const json& a = j.at("attack");
      check_keys(a, {"kind", "count", "budget", "targets"}, "attack");
      read_enum(a, "kind", cfg.attack.kind, kAttacks);
      read(a, "count", cfg.attack.count);
      read(a, "budget", cfg.attack.budget);
      read(a, "targets", cfg.attack.targets);
    }
    if (j.contains("probe")) {
      const json& p = j.at("probe");
      check_keys(p, {"node", "trials"}, "probe");
      read(p, "node", cfg.probe_node);
      read(p, "trials", cfg.probe_trials);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      check_keys(s, {"axis", "values", "seeds"}, "sweep");
      read(s, "axis", cfg.sweep_axis);
      read(s, "values", cfg.sweep_values);
      read(s, "seeds", cfg.sweep_seeds);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config field: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config ") + path.string() + ": " + e.what(), 0);
  }
  return experiment_from_json(j);
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig r = *this;
  r.dither.seed = derive_seed(seed, kDitherStream);
  r.train.seed = derive_seed(seed, kTrainStream);
  if (r.noise) {
    r.noise->seed = derive_seed(seed, kNoiseStream);
    if (!(r.noise->snr > 0.0)) throw ValidationError("noise snr must be positive");
  }
  r.dither.validate();
  r.train.validate();
  if (std::find(r.knn.begin(), r.knn.end(), std::size_t{0}) != r.knn.end())
    throw ValidationError("knn values must be at least 1");
  if (r.data.attacked_edges.has_value() != r.data.attack_manifest.has_value())
    throw ValidationError("attacked_edges and attack_manifest go together");
  if (r.attack.kind == AttackKind::targeted && !r.attack.targets.empty() && r.attack.budget == 0)
    throw ValidationError("targeted attack budget must be at least 1");
  if (r.sweep_seeds == 0) throw ValidationError("sweep seeds must be at least 1");
  static const char* const kAxes[] = {"q1", "q2", "i_count", "inserted_edges"};
  if (std::none_of(std::begin(kAxes), std::end(kAxes), [&](const char* a) { return r.sweep_axis == a; }))
    throw ValidationError("unknown sweep axis \"" + r.sweep_axis + "\"");
  return r;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("out");
  return fnv1a_hex(j.dump());
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset out;
  if (cfg.sbm) {
    SbmExperiment e = make_sbm_experiment(*cfg.sbm, derive_seed(cfg.seed, kSbmStream));
    out.x = std::move(e.x);
    out.observed = {std::move(e.perturbed)};
    out.clean = std::move(e.clean);
    out.labels = std::move(e.labels);
  } else {
    if (cfg.knn.empty() && cfg.data.edges.empty())
      throw ValidationError("no graph source: give data.edges, knn or sbm");
    if (!cfg.data.labels || !cfg.data.splits) throw ValidationError("data.labels and data.splits are required");
    std::size_t n = 0;
    if (cfg.data.n_nodes) {
      n = *cfg.data.n_nodes;
    } else if (cfg.data.features) {
      out.x = load_features(*cfg.data.features);
      n = out.x.n_nodes();
    } else {
      for (const auto& p : cfg.data.edges) n = std::max(n, edge_list_node_count(p));
      n = std::max(n, load_labels_and_splits(*cfg.data.labels, *cfg.data.splits).n_nodes());
    }
    if (cfg.data.features && out.x.n_nodes() == 0) out.x = load_features(*cfg.data.features);
    if (!cfg.data.features) out.x = FeatureMatrix::identity(n);
    if (out.x.n_nodes() != n)
      throw ShapeError("features have " + std::to_string(out.x.n_nodes()) + " rows, expected " + std::to_string(n));
    out.labels = load_labels_and_splits(*cfg.data.labels, *cfg.data.splits, n);

    if (!cfg.knn.empty()) {
      for (std::size_t k : cfg.knn) out.observed.push_back(knn_graph(out.x, k));
    } else {
      for (const auto& p : cfg.data.edges) out.observed.push_back(load_edge_list(p, n));
    }
    if (cfg.data.attacked_edges) {
      if (out.observed.size() != 1) throw ValidationError("an attacked graph needs exactly one original graph");
      AttackedGraph attacked = load_attacked_graph(*cfg.data.attacked_edges, *cfg.data.attack_manifest, out.observed[0]);
      out.clean = std::move(out.observed[0]);
      out.observed[0] = std::move(attacked.graph);
      out.warnings = std::move(attacked.warnings);
    }
  }

  const bool random_attack = cfg.attack.kind == AttackKind::random && cfg.attack.count > 0;
  const bool targeted_attack = cfg.attack.kind == AttackKind::targeted && !cfg.attack.targets.empty();
  if (random_attack || targeted_attack) {
    if (out.observed.size() != 1) throw ValidationError("attacks apply to a single observed graph");
    if (!out.clean) out.clean = out.observed[0];
    const std::uint64_t seed = derive_seed(cfg.seed, kAttackStream);
    out.observed[0] = random_attack ? random_edge_insertion(out.observed[0], cfg.attack.count, seed)
                                    : simple_targeted_attack(out.observed[0], cfg.attack.targets, cfg.attack.budget,
                                                             &out.labels, seed);
  }
  return out;
}

PreparedInput prepare_input(const ExperimentConfig& cfg, const Dataset& data, std::size_t threads) {
  PreparedInput in;
  const bool noisy_features = cfg.noise && cfg.noise->target == NoiseTarget::features;
  const bool noisy_graphs = cfg.noise && cfg.noise->target == NoiseTarget::adjacency;
  in.x = noisy_features ? gaussian_noise(data.x, *cfg.noise) : data.x;

  if (cfg.dither_enabled) {
    if (data.observed.size() != 1)
      throw ValidationError("dithering needs a single observed graph; set dither.enabled to false");
    in.graphs = dither(data.observed[0], cfg.dither, threads).graphs;
  } else {
    in.graphs = data.observed;
  }

  if (noisy_graphs) {
    std::vector<SparseMatrix> weighted;
    for (std::size_t i = 0; i < in.graphs.size(); ++i) {
      NoiseConfig per_graph = *cfg.noise;
      per_graph.seed = derive_seed(cfg.noise->seed, i);
      weighted.push_back(gaussian_noise(WeightedGraph::from_graph(in.graphs[i]), per_graph).to_sparse());
    }
    in.graphs.clear();
    in.powers = adjacency_powers(std::move(weighted), cfg.model.k_hop, cfg.model.normalization);
  } else {
    in.powers = adjacency_powers(in.graphs, cfg.model.k_hop, cfg.model.normalization);
  }
  return in;
}

RunResult run_experiment(const ExperimentConfig& cfg, const EpochCallback& on_epoch) {
  const ExperimentConfig r = cfg.resolved();
  const Dataset data = load_dataset(r);
  const PreparedInput in = prepare_input(r, data);
  return train_and_test(in.x, in.powers, data.labels, r.model, r.train, on_epoch);
}

ExperimentConfig with_axis_value(const ExperimentConfig& cfg, const std::string& axis, double value) {
  ExperimentConfig c = cfg;
  if (axis == "q1") {
    c.dither.q1 = value;
  } else if (axis == "q2") {
    c.dither.q2 = value;
  } else if (axis == "i_count") {
    c.dither.i_count = to_count(value, axis);
  } else if (axis == "inserted_edges") {
    if (c.sbm) {
      c.sbm->inserted_edges = to_count(value, axis);
    } else {
      c.attack.kind = AttackKind::random;
      c.attack.count = to_count(value, axis);
    }
  } else {
    throw ValidationError("unknown sweep axis \"" + axis + "\"");
  }
  return c;
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, std::size_t threads) {
  const ExperimentConfig base = cfg.resolved();
  if (base.sweep_values.empty()) throw ValidationError("sweep needs at least one value");
  const std::size_t n_values = base.sweep_values.size();
  const std::size_t n_seeds = base.sweep_seeds;

  std::vector<ExperimentConfig> jobs;
  for (double v : base.sweep_values)
    for (std::size_t s = 0; s < n_seeds; ++s) {
      ExperimentConfig c = with_axis_value(base, base.sweep_axis, v);
      c.seed = base.seed + s;
      jobs.push_back(std::move(c));
    }

  std::vector<Evaluation> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        results[k] = run_experiment(jobs[k]).test;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(std::max<std::size_t>(threads, 1), jobs.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows(n_values);
  for (std::size_t v = 0; v < n_values; ++v) {
    SweepRow& row = rows[v];
    row.axis = base.sweep_axis;
    row.value = base.sweep_values[v];
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const Evaluation& e = results[v * n_seeds + s];
      row.seeds.push_back(base.seed + s);
      row.accuracy += e.accuracy;
      row.macro_f1 += e.macro_f1;
    }
    row.accuracy /= static_cast<double>(n_seeds);
    row.macro_f1 /= static_cast<double>(n_seeds);
  }
  return rows;
}

}  // namespace edagcn
