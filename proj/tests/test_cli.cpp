#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include <json.hpp>

#include "edagcn/io.hpp"
#include "support.hpp"

using namespace edagcn;
using namespace edagcn::test;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string output;
};

// Runs the CLI with stdout and stderr captured into dir/stdout.txt.
Run run_cli(const TempDir& dir, const std::string& args) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + EDAGCN_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

std::string quoted(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

json small_config() {
  return {{"sbm", {{"nodes_per_block", 15}, {"p_in", 0.3}, {"p_out", 0.02}, {"inserted_edges", 4}}},
          {"dither", {{"i_count", 2}, {"q1", 0.9}, {"q2", 0.99}}},
          {"model", {{"widths", {6, 2}}, {"normalization", "symmetric"}}},
          {"train", {{"max_epochs", 12}, {"patience", 12}}}};
}

void write_labeled_path(const TempDir& dir) {
  write_file(dir / "g.tsv", "0\t1\n1\t2\n2\t3\n");
  write_file(dir / "labels.csv", "0,0\n1,0\n2,1\n3,1\n");
  write_file(dir / "splits.csv", "0,train\n2,train\n1,val\n3,test\n");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("dither with keep-all copies the input") {
    TempDir dir("cli_dither");
    write_file(dir / "g.tsv", "0\t1\n1\t2\n0\t3\n");
    write_file(dir / "cfg.json", json{{"data", {{"edges", {(dir / "g.tsv").string()}}}}}.dump());
    const std::string base = "dither --config " + quoted(dir / "cfg.json") + " --q1 1 --q2 1 --i-count 2 --seed 4";
    const Run r = run_cli(dir, base + " --out " + quoted(dir / "a"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    const Graph source = load_edge_list(dir / "g.tsv", 4);
    for (const char* name : {"graph_0.tsv", "graph_1.tsv"}) CHECK(load_edge_list(dir / "a" / name, 4) == source);
    const json manifest = json::parse(read_file(dir / "a" / "manifest.json"));
    CHECK(manifest["q1"] == 1.0);
    CHECK(manifest["i_count"] == 2);
    CHECK(manifest["source_hash"] == graph_hash(source));
    CHECK(manifest.contains("seed"));
    CHECK(manifest["config_hash"] == json::parse(read_file(dir / "a" / "config.json"))["config_hash"]);

    REQUIRE(run_cli(dir, "dither --config " + quoted(dir / "cfg.json") + " --q1 0.7 --q2 0.9 --i-count 3 --out " +
                             quoted(dir / "b"))
                .code == 0);
    REQUIRE(run_cli(dir, "dither --config " + quoted(dir / "cfg.json") + " --q1 0.7 --q2 0.9 --i-count 3 --out " +
                             quoted(dir / "c"))
                .code == 0);
    for (const char* name : {"graph_0.tsv", "graph_2.tsv", "manifest.json"})
      CHECK(read_file(dir / "b" / name) == read_file(dir / "c" / name));
  }

  TEST_CASE("probe prints closed form and both estimates") {
    TempDir dir("cli_probe");
    write_file(dir / "clean.tsv", "0\t1\n");
    write_file(dir / "observed.tsv", "0\t1\n1\t2\n");
    const Run r = run_cli(dir, "probe --original " + quoted(dir / "clean.tsv") + " --perturbed " +
                                   quoted(dir / "observed.tsv") + " --node 1 --n-nodes 3 --q1 0.9 --q2 1 --i-count 10" +
                                   " --trials 2000 --out " + quoted(dir / "o"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("0.651322") != std::string::npos);
    const json probe = json::parse(read_file(dir / "o" / "probe.json"));
    CHECK(probe.contains("config_hash"));
    CHECK(r.output.find("+/-") != std::string::npos);

    const Run same = run_cli(dir, "probe --original " + quoted(dir / "clean.tsv") + " --perturbed " +
                                      quoted(dir / "clean.tsv") + " --node 2 --n-nodes 3 --trials 100 --out " +
                                      quoted(dir / "p"));
    REQUIRE(same.code == 0);
    CHECK(same.output.find("1.000000") != std::string::npos);
  }

  TEST_CASE("train is reproducible and evaluate agrees") {
    TempDir dir("cli_train");
    write_file(dir / "cfg.json", small_config().dump());
    const std::string base = "train --config " + quoted(dir / "cfg.json") + " --seed 2";
    REQUIRE(run_cli(dir, base + " --out " + quoted(dir / "a")).code == 0);
    REQUIRE(run_cli(dir, base + " --out " + quoted(dir / "b")).code == 0);
    CHECK(read_file(dir / "a" / "metrics.json") == read_file(dir / "b" / "metrics.json"));

    const json metrics = json::parse(read_file(dir / "a" / "metrics.json"));
    CHECK(metrics.contains("accuracy"));
    CHECK(metrics.contains("macro_f1"));
    std::istringstream history(read_file(dir / "a" / "history.jsonl"));
    std::size_t lines = 0;
    for (std::string line; std::getline(history, line); ++lines)
      CHECK(json::parse(line)["config_hash"] == metrics["config_hash"]);
    CHECK(lines == metrics["epochs_run"].get<std::size_t>());

    const Run ev = run_cli(dir, "evaluate --config " + quoted(dir / "cfg.json") + " --seed 2 --mask test --out " +
                                    quoted(dir / "a"));
    REQUIRE_MESSAGE(ev.code == 0, ev.output);
    const json e = json::parse(read_file(dir / "a" / "evaluation_test.json"));
    CHECK(e["accuracy"] == metrics["accuracy"]);
  }

  TEST_CASE("attack writes the delta") {
    TempDir dir("cli_attack");
    write_labeled_path(dir);
    json cfg{{"data",
              {{"edges", {(dir / "g.tsv").string()}},
               {"labels", (dir / "labels.csv").string()},
               {"splits", (dir / "splits.csv").string()}}}};
    write_file(dir / "none.json", cfg.dump());
    cfg["attack"] = {{"kind", "random"}, {"count", 2}};
    write_file(dir / "two.json", cfg.dump());

    REQUIRE(run_cli(dir, "attack --config " + quoted(dir / "none.json") + " --out " + quoted(dir / "a")).code == 0);
    CHECK(load_edge_list(dir / "a" / "attacked.tsv", 4) == load_edge_list(dir / "g.tsv", 4));
    CHECK(json::parse(read_file(dir / "a" / "attack_report.json"))["insertions"] == 0);

    REQUIRE(run_cli(dir, "attack --config " + quoted(dir / "two.json") + " --out " + quoted(dir / "b")).code == 0);
    REQUIRE(run_cli(dir, "attack --config " + quoted(dir / "two.json") + " --out " + quoted(dir / "c")).code == 0);
    CHECK(json::parse(read_file(dir / "b" / "attack_report.json"))["insertions"] == 2);
    CHECK(read_file(dir / "b" / "attacked.tsv") == read_file(dir / "c" / "attacked.tsv"));
  }

  TEST_CASE("gradcheck passes and the corrupt flag fails") {
    TempDir dir("cli_grad");
    const Run ok = run_cli(dir, "gradcheck --out " + quoted(dir / "a"));
    REQUIRE_MESSAGE(ok.code == 0, ok.output);
    const json report = json::parse(read_file(dir / "a" / "gradcheck.json"));
    CHECK(report.contains("config_hash"));

    const Run bad = run_cli(dir, "gradcheck --corrupt --r-mode per_node --w-mode per_node --residual 1 --out " +
                                     quoted(dir / "b"));
    CHECK(bad.code == 1);
    CHECK(bad.output.find("FAIL") != std::string::npos);
  }

  TEST_CASE("sweep writes one row per value") {
    TempDir dir("cli_sweep");
    write_file(dir / "cfg.json", small_config().dump());
    const Run r = run_cli(dir, "sweep --config " + quoted(dir / "cfg.json") +
                                   " --axis i_count --values 2,1 --seeds 2 --seed 5 --out " + quoted(dir / "s"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    std::istringstream csv(read_file(dir / "s" / "sweep.csv"));
    std::string header, first, second, extra;
    std::getline(csv, header);
    std::getline(csv, first);
    std::getline(csv, second);
    CHECK(header.rfind("axis,value,seeds", 0) == 0);
    CHECK(first.rfind("i_count,2,5;6,", 0) == 0);
    CHECK(second.rfind("i_count,1,5;6,", 0) == 0);
    CHECK_FALSE(std::getline(csv, extra));
  }

  TEST_CASE("exit codes") {
    TempDir dir("cli_exit");
    CHECK(run_cli(dir, "train --q1 2 --out " + quoted(dir / "a")).code == 2);
    CHECK(run_cli(dir, "sweep --axis i_count --values 1.5 --out " + quoted(dir / "b")).code == 2);
    CHECK(run_cli(dir, "no-such-command").code == 2);
    write_file(dir / "bad.json", "{");
    CHECK(run_cli(dir, "train --config " + quoted(dir / "bad.json") + " --out " + quoted(dir / "c")).code == 2);
  }
}
