// edagcn: command-line front end for edge dithering and AGCN experiments.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edagcn/checkpoint.hpp"
#include "edagcn/error.hpp"
#include "edagcn/experiment.hpp"
#include "edagcn/io.hpp"
#include "edagcn/metrics.hpp"
#include "edagcn/recovery.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edagcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

// Flags shared by every subcommand. Unset flags leave the config alone.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> q1, q2, mu1, mu2, lambda, lr;
  std::optional<std::size_t> i_count, epochs, patience, k_hop;
  std::optional<std::string> r_mode, w_mode, normalization;
  std::optional<bool> residual;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment config");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--out", out, "output directory");
    app->add_option("--q1", q1, "edge keep probability");
    app->add_option("--q2", q2, "non-edge keep probability");
    app->add_option("--i-count", i_count, "number of dithered graphs");
    app->add_option("--mu1", mu1, "smoothness weight");
    app->add_option("--mu2", mu2, "l2 weight");
    app->add_option("--lambda", lambda, "l1 weight on graph mixing");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--epochs", epochs, "maximum epochs");
    app->add_option("--patience", patience, "early-stopping patience");
    app->add_option("--k-hop", k_hop, "hops per layer");
    app->add_option("--r-mode", r_mode, "graph mixing: per_node or shared")->check(CLI::IsMember({"per_node", "shared"}));
    app->add_option("--w-mode", w_mode, "feature mixing: per_node or shared")->check(CLI::IsMember({"per_node", "shared"}));
    app->add_option("--residual", residual, "residual branch on or off");
    app->add_option("--normalization", normalization, "adjacency normalization: none or symmetric")
        ->check(CLI::IsMember({"none", "symmetric"}));
  }

  ExperimentConfig apply() const {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_experiment(config);
    json j = to_json(cfg);
    j.erase("derived_seeds");
    if (seed) j["seed"] = *seed;
    if (out) j["out"] = *out;
    if (q1) j["dither"]["q1"] = *q1;
    if (q2) j["dither"]["q2"] = *q2;
    if (i_count) j["dither"]["i_count"] = *i_count;
    if (mu1) j["train"]["mu1"] = *mu1;
    if (mu2) j["train"]["mu2"] = *mu2;
    if (lambda) j["train"]["lambda"] = *lambda;
    if (lr) j["train"]["learning_rate"] = *lr;
    if (epochs) j["train"]["max_epochs"] = *epochs;
    if (patience) j["train"]["patience"] = *patience;
    if (k_hop) j["model"]["k_hop"] = *k_hop;
    if (r_mode) j["model"]["r_mode"] = *r_mode;
    if (w_mode) j["model"]["w_mode"] = *w_mode;
    if (residual) j["model"]["residual"] = *residual;
    if (normalization) j["model"]["normalization"] = *normalization;
    return experiment_from_json(j).resolved();
  }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Creates the output directory and records the resolved config in it.
std::string prepare_out(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out);
  const std::string hash = config_hash(cfg);
  json j = to_json(cfg);
  j["config_hash"] = hash;
  write_json(cfg.out / "config.json", j);
  return hash;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

Graph single_observed_graph(const ExperimentConfig& cfg) {
  if (cfg.sbm) return load_dataset(cfg).observed.at(0);
  if (cfg.data.edges.size() != 1) throw ValidationError("dither needs exactly one edge file in data.edges");
  const std::size_t n = cfg.data.n_nodes ? *cfg.data.n_nodes : edge_list_node_count(cfg.data.edges[0]);
  return load_edge_list(cfg.data.edges[0], n);
}

int cmd_dither(const ExperimentConfig& cfg) {
  const std::string hash = prepare_out(cfg);
  const DitheredGraphSet set = dither(single_observed_graph(cfg), cfg.dither, thread_budget());
  save_dithered_set(cfg.out, set, hash);
  std::printf("wrote %zu dithered graphs to %s (q1=%g q2=%g seed=%llu)\n", set.graphs.size(),
              cfg.out.string().c_str(), cfg.dither.q1, cfg.dither.q2,
              static_cast<unsigned long long>(cfg.dither.seed));
  return kExitOk;
}

struct ProbeArgs {
  std::optional<std::string> original, perturbed;
  std::optional<NodeId> node;
  std::optional<std::size_t> trials, n_nodes;
};

int cmd_probe(const ExperimentConfig& cfg, const ProbeArgs& args) {
  Graph original, perturbed;
  if (args.original || args.perturbed) {
    if (!args.original || !args.perturbed) throw ValidationError("probe needs both --original and --perturbed");
    const std::size_t n = args.n_nodes ? *args.n_nodes
                                       : std::max(edge_list_node_count(*args.original),
                                                  edge_list_node_count(*args.perturbed));
    original = load_edge_list(*args.original, n);
    perturbed = load_edge_list(*args.perturbed, n);
  } else {
    const Dataset data = load_dataset(cfg);
    if (!data.clean) throw ValidationError("probe needs a clean graph: pass --original and --perturbed");
    original = *data.clean;
    perturbed = data.observed.at(0);
  }
  const NodeId node = args.node.value_or(cfg.probe_node);
  const std::size_t trials = args.trials.value_or(cfg.probe_trials);
  if (node >= original.n_nodes()) throw BoundsError("probe node " + std::to_string(node) + " out of range");
  const std::string hash = prepare_out(cfg);

  const double q1 = cfg.dither.q1, q2 = cfg.dither.q2;
  const std::size_t i_count = cfg.dither.i_count;
  const EdgeEventCounts c = count_edge_events(original, perturbed, node);
  const double closed = neighborhood_recovery_probability(c, q1, q2, i_count);
  const McRecovery mc = monte_carlo_recovery(original, perturbed, node, cfg.dither, trials);
  const double spurious = edge_restore_probability(PairCase::spurious_edge, q1, q2, i_count);
  const double missing = edge_restore_probability(PairCase::missing_edge, q1, q2, i_count);

  std::printf("node %u  kappa=%zu lambda=%zu mu=%zu nu=%zu\n", node, c.kappa, c.lambda_, c.mu, c.nu);
  std::printf("spurious edge restored (1-q1^I):  %.6f\n", spurious);
  std::printf("missing edge restored (1-q2^I):   %.6f\n", missing);
  std::printf("neighborhood, closed form:        %.6f\n", closed);
  std::printf("neighborhood, per-pair union MC:  %.6f +/- %.6f (%zu trials)\n", mc.per_pair_union.mean,
              mc.per_pair_union.std_error, trials);
  std::printf("neighborhood, single-draw MC:     %.6f +/- %.6f (%zu trials)\n", mc.single_draw_full.mean,
              mc.single_draw_full.std_error, trials);

  auto estimate = [](const McEstimate& e) {
    return json{{"mean", e.mean}, {"std_error", e.std_error}, {"trials", e.trials}};
  };
  write_json(cfg.out / "probe.json", {{"config_hash", hash},
                                      {"node", node},
                                      {"counts", {{"kappa", c.kappa}, {"lambda", c.lambda_}, {"mu", c.mu}, {"nu", c.nu}}},
                                      {"spurious_edge_restore", spurious},
                                      {"missing_edge_restore", missing},
                                      {"closed_form", closed},
                                      {"per_pair_union", estimate(mc.per_pair_union)},
                                      {"single_draw_full", estimate(mc.single_draw_full)}});
  return kExitOk;
}

json evaluation_json(const Evaluation& e) {
  return {{"accuracy", e.accuracy}, {"macro_f1", e.macro_f1}, {"per_class_f1", e.per_class_f1}};
}

int cmd_train(const ExperimentConfig& cfg) {
  const std::string hash = prepare_out(cfg);
  const Dataset data = load_dataset(cfg);
  for (const auto& w : data.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const PreparedInput in = prepare_input(cfg, data, thread_budget());

  std::ofstream history(cfg.out / "history.jsonl", std::ios::binary);
  if (!history) throw ValidationError("cannot write history");
  std::size_t last_epoch = 0;
  auto on_epoch = [&](const EpochRecord& r) {
    last_epoch = r.epoch;
    const json line = {{"config_hash", hash},
                       {"epoch", r.epoch},
                       {"loss", r.train_loss.total},
                       {"cross_entropy", r.train_loss.cross_entropy},
                       {"smoothness", r.train_loss.smoothness},
                       {"weight_decay", r.train_loss.weight_decay},
                       {"sparsity", r.train_loss.sparsity},
                       {"val_accuracy", r.val_accuracy},
                       {"val_loss", r.val_loss}};
    history << line.dump() << '\n' << std::flush;
  };

  RunResult run;
  try {
    run = train_and_test(in.x, in.powers, data.labels, cfg.model, cfg.train, on_epoch);
  } catch (const NumericError& e) {
    write_json(cfg.out / "error.json",
               {{"config_hash", hash}, {"error", e.what()}, {"last_finite_epoch", last_epoch}});
    throw;
  }

  save_checkpoint(cfg.out / "checkpoint.json", Checkpoint{run.model, run.training.best_params, hash});
  write_json(cfg.out / "metrics.json", {{"config_hash", hash},
                                        {"seed", cfg.seed},
                                        {"best_epoch", run.training.best_epoch},
                                        {"epochs_run", run.training.history.size()},
                                        {"test", evaluation_json(run.test)},
                                        {"accuracy", run.test.accuracy},
                                        {"macro_f1", run.test.macro_f1}});
  std::printf("best epoch %zu of %zu, test accuracy %.4f, macro-F1 %.4f\n", run.training.best_epoch,
              run.training.history.size(), run.test.accuracy, run.test.macro_f1);
  return kExitOk;
}

int cmd_attack(const ExperimentConfig& cfg) {
  const std::string hash = prepare_out(cfg);
  const Dataset data = load_dataset(cfg);
  if (data.observed.size() != 1) throw ValidationError("attack needs a single observed graph");
  const Graph& attacked = data.observed[0];
  const Graph& original = data.clean ? *data.clean : attacked;
  const PerturbationDelta delta = perturbation_delta(original, attacked);

  save_edge_list(cfg.out / "attacked.tsv", attacked);
  AttackManifest manifest;
  manifest.targets = cfg.attack.kind == AttackKind::targeted ? cfg.attack.targets : std::vector<NodeId>{};
  manifest.original_hash = graph_hash(original);
  manifest.notes = std::string(cfg.attack.kind == AttackKind::random ? "random" : "targeted") +
                   " insertion, config " + hash;
  save_attack_manifest(cfg.out / "manifest.json", manifest);

  json inserted = json::array();
  for (const Edge& e : delta.insertions) inserted.push_back({e.u, e.v});
  write_json(cfg.out / "attack_report.json", {{"config_hash", hash},
                                              {"kind", cfg.attack.kind == AttackKind::random ? "random" : "targeted"},
                                              {"insertions", delta.insertions.size()},
                                              {"deletions", delta.deletions.size()},
                                              {"inserted_edges", inserted},
                                              {"original_hash", manifest.original_hash},
                                              {"attacked_hash", graph_hash(attacked)}});
  std::printf("%zu insertions, %zu deletions; wrote %s\n", delta.insertions.size(), delta.deletions.size(),
              (cfg.out / "attacked.tsv").string().c_str());
  return kExitOk;
}

struct GradcheckArgs {
  double step = 1e-5;
  double tolerance = 1e-4;
  bool corrupt = false;
};

int cmd_gradcheck(const ExperimentConfig& cfg, const Overrides& o, const GradcheckArgs& args) {
  const std::string hash = prepare_out(cfg);
  std::vector<MixMode> r_modes{MixMode::per_node, MixMode::shared}, w_modes = r_modes;
  std::vector<bool> residuals{false, true};
  if (o.r_mode) r_modes = {cfg.model.r_mode};
  if (o.w_mode) w_modes = {cfg.model.w_mode};
  if (o.residual) residuals = {cfg.model.residual};

  bool all_pass = true;
  json runs = json::array();
  for (MixMode r : r_modes)
    for (MixMode w : w_modes)
      for (bool res : residuals) {
        const Instance inst = gradcheck_instance(cfg.seed, r, w, res);
        const GradCheckReport rep = check_instance_gradient(inst, args.step, args.tolerance, args.corrupt);
        all_pass = all_pass && rep.pass;
        const char* rn = r == MixMode::shared ? "shared" : "per_node";
        const char* wn = w == MixMode::shared ? "shared" : "per_node";
        std::printf("%s r=%-8s w=%-8s residual=%-3s max_rel=%.3e worst=%s (analytic %.6e, numeric %.6e)\n",
                    rep.pass ? "PASS" : "FAIL", rn, wn, res ? "on" : "off", rep.max_rel_error,
                    rep.worst_parameter.c_str(), rep.worst_analytic, rep.worst_numeric);
        runs.push_back({{"r_mode", rn},
                        {"w_mode", wn},
                        {"residual", res},
                        {"pass", rep.pass},
                        {"max_rel_error", rep.max_rel_error},
                        {"worst_parameter", rep.worst_parameter},
                        {"worst_tensor", rep.worst_tensor},
                        {"analytic", rep.worst_analytic},
                        {"numeric", rep.worst_numeric},
                        {"checked", rep.checked}});
      }
  write_json(cfg.out / "gradcheck.json", {{"config_hash", hash},
                                          {"seed", cfg.seed},
                                          {"step", args.step},
                                          {"tolerance", args.tolerance},
                                          {"corrupt", args.corrupt},
                                          {"pass", all_pass},
                                          {"runs", runs}});
  return all_pass ? kExitOk : kExitFailed;
}

struct SweepArgs {
  std::optional<std::string> axis;
  std::vector<double> values;
  std::optional<std::size_t> seeds;
};

int cmd_sweep(ExperimentConfig cfg, const SweepArgs& args) {
  if (args.axis) cfg.sweep_axis = *args.axis;
  if (!args.values.empty()) cfg.sweep_values = args.values;
  if (args.seeds) cfg.sweep_seeds = *args.seeds;
  cfg = cfg.resolved();
  const std::string hash = prepare_out(cfg);
  const std::vector<SweepRow> rows = sweep(cfg, thread_budget());

  std::ofstream csv(cfg.out / "sweep.csv", std::ios::binary);
  if (!csv) throw ValidationError("cannot write sweep.csv");
  csv << "axis,value,seeds,accuracy,macro_f1,config_hash\n";
  for (const SweepRow& row : rows) {
    std::string seeds;
    for (std::uint64_t s : row.seeds) seeds += (seeds.empty() ? "" : ";") + std::to_string(s);
    csv << row.axis << ',' << format_number(row.value) << ',' << seeds << ',' << format_number(row.accuracy) << ','
        << format_number(row.macro_f1) << ',' << hash << '\n';
    std::printf("%s=%s  accuracy %.4f  macro-F1 %.4f  (seeds %s)\n", row.axis.c_str(),
                format_number(row.value).c_str(), row.accuracy, row.macro_f1, seeds.c_str());
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::optional<std::string> checkpoint;
  std::string mask = "test";
};

int cmd_evaluate(const ExperimentConfig& cfg, const EvaluateArgs& args) {
  const Dataset data = load_dataset(cfg);
  const PreparedInput in = prepare_input(cfg, data, thread_budget());
  const ModelConfig expected =
      cfg.model.resolve(in.x.n_nodes(), in.x.n_features(), data.labels.n_classes(), in.powers.n_graphs());
  const fs::path path = args.checkpoint ? fs::path(*args.checkpoint) : cfg.out / "checkpoint.json";
  const Checkpoint ckpt = load_checkpoint(path, expected);
  const std::string hash = config_hash(cfg);
  if (!ckpt.config_hash.empty() && ckpt.config_hash != hash)
    std::fprintf(stderr, "warning: checkpoint was trained under config %s, evaluating under %s\n",
                 ckpt.config_hash.c_str(), hash.c_str());

  const auto& mask = args.mask == "train" ? data.labels.train_mask
                     : args.mask == "val" ? data.labels.val_mask
                                          : data.labels.test_mask;
  const Evaluation e = evaluate(ckpt.params, in.x, in.powers, data.labels, mask, expected);
  fs::create_directories(cfg.out);
  json report = evaluation_json(e);
  report["config_hash"] = hash;
  report["checkpoint_config_hash"] = ckpt.config_hash;
  report["mask"] = args.mask;
  write_json(cfg.out / ("evaluation_" + args.mask + ".json"), report);
  std::printf("%s accuracy %.4f, macro-F1 %.4f over %zu nodes\n", args.mask.c_str(), e.accuracy, e.macro_f1,
              mask.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-dithered adaptive GCN experiments"};
  app.require_subcommand(1);

  Overrides o;
  ProbeArgs probe_args;
  GradcheckArgs grad_args;
  SweepArgs sweep_args;
  EvaluateArgs eval_args;

  CLI::App* dither_cmd = app.add_subcommand("dither", "write I dithered copies of a graph plus a manifest");
  CLI::App* probe_cmd = app.add_subcommand("probe", "closed-form and Monte-Carlo recovery probabilities");
  CLI::App* train_cmd = app.add_subcommand("train", "train and test one model");
  CLI::App* attack_cmd = app.add_subcommand("attack", "perturb a graph and report the delta");
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "accuracy as one setting varies");
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a saved checkpoint");
  for (CLI::App* sub : {dither_cmd, probe_cmd, train_cmd, attack_cmd, grad_cmd, sweep_cmd, eval_cmd}) o.attach(sub);

  probe_cmd->add_option("--original", probe_args.original, "clean edge list");
  probe_cmd->add_option("--perturbed", probe_args.perturbed, "observed edge list");
  probe_cmd->add_option("--node", probe_args.node, "node whose neighborhood is probed");
  probe_cmd->add_option("--trials", probe_args.trials, "Monte-Carlo trials");
  probe_cmd->add_option("--n-nodes", probe_args.n_nodes, "node count when the edge lists do not show it");

  grad_cmd->add_option("--step", grad_args.step, "central-difference step");
  grad_cmd->add_option("--tol", grad_args.tolerance, "maximum relative error");
  grad_cmd->add_flag("--corrupt", grad_args.corrupt, "double the largest analytic gradient entry first");

  sweep_cmd->add_option("--axis", sweep_args.axis, "q1, q2, i_count or inserted_edges")
      ->check(CLI::IsMember({"q1", "q2", "i_count", "inserted_edges"}));
  sweep_cmd->add_option("--values", sweep_args.values, "comma-separated values")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "seeds per value, starting at --seed");

  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint path (default OUT/checkpoint.json)");
  eval_cmd->add_option("--mask", eval_args.mask, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const ExperimentConfig cfg = o.apply();
    if (*dither_cmd) return cmd_dither(cfg);
    if (*probe_cmd) return cmd_probe(cfg, probe_args);
    if (*train_cmd) return cmd_train(cfg);
    if (*attack_cmd) return cmd_attack(cfg);
    if (*grad_cmd) return cmd_gradcheck(cfg, o, grad_args);
    if (*sweep_cmd) return cmd_sweep(cfg, sweep_args);
    if (*eval_cmd) return cmd_evaluate(cfg, eval_args);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailed;
  }
  return kExitFailed;
}
