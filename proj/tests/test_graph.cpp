#include <doctest.h>

#include <algorithm>
#include <set>

#include "edagcn/error.hpp"
#include "edagcn/graph.hpp"
#include "edagcn/io.hpp"
#include "support.hpp"

using namespace edagcn;
using namespace edagcn::test;

TEST_SUITE("graph") {
  TEST_CASE("edge list loading") {
    TempDir dir("edges");
    write_file(dir / "a.tsv", "0\t1\n1\t2\n");
    const Graph a = load_edge_list(dir / "a.tsv", 3);
    CHECK(a.edges() == std::vector<Edge>{{0, 1}, {1, 2}});

    write_file(dir / "b.tsv", "0\t1\n1\t0\n");
    const Graph b = load_edge_list(dir / "b.tsv", 2);
    CHECK(b.num_edges() == 1);
    CHECK(b.has_edge(1, 0));

    write_file(dir / "c.tsv", "0\t5\n");
    CHECK_THROWS_AS(load_edge_list(dir / "c.tsv", 3), BoundsError);

    write_file(dir / "d.tsv", "# comment\n\n0 1\n2\t2\n");
    CHECK_THROWS_AS(load_edge_list(dir / "d.tsv", 3), ValidationError);

    write_file(dir / "e.tsv", "0\t1\nx\t2\n");
    try {
      load_edge_list(dir / "e.tsv", 3);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK(edge_list_node_count(dir / "a.tsv") == 3);
  }

  TEST_CASE("edge list save and reload") {
    TempDir dir("edges_rt");
    const Graph g = random_graph(9, 0.4, 3);
    save_edge_list(dir / "g.tsv", g);
    CHECK(load_edge_list(dir / "g.tsv", 9) == g);
  }

  TEST_CASE("construction rejects bad pairs") {
    CHECK_THROWS_AS(make_graph(3, {{1, 1}}), ValidationError);
    CHECK_THROWS_AS(make_graph(3, {{0, 3}}), BoundsError);
    const Graph g = make_graph(4, {{2, 1}, {1, 2}, {0, 3}});
    CHECK(g.num_edges() == 2);
    CHECK(g.num_non_edges() == 4);
    CHECK(g.degree(1) == 1);
  }

  TEST_CASE("features") {
    TempDir dir("features");
    write_file(dir / "id.csv", "1,0\n0,1\n");
    const FeatureMatrix id = load_features(dir / "id.csv");
    CHECK(id.values == RowMatrix::Identity(2, 2));

    write_file(dir / "row.csv", "0.5,-1,2\n");
    const FeatureMatrix row = load_features(dir / "row.csv");
    REQUIRE(row.values.rows() == 1);
    CHECK(row.values(0, 0) == 0.5);
    CHECK(row.values(0, 1) == -1.0);
    CHECK(row.values(0, 2) == 2.0);

    write_file(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(load_features(dir / "ragged.csv"), ShapeError);
    write_file(dir / "text.csv", "1,a\n");
    CHECK_THROWS_AS(load_features(dir / "text.csv"), ParseError);
  }

  TEST_CASE("labels and splits") {
    TempDir dir("labels");
    write_file(dir / "labels.csv", "0,0\n1,1\n");
    write_file(dir / "splits.csv", "0,train\n1,test\n");
    const LabelData d = load_labels_and_splits(dir / "labels.csv", dir / "splits.csv");
    CHECK(d.one_hot == RowMatrix::Identity(2, 2));
    CHECK(d.train_mask == std::vector<NodeId>{0});
    CHECK(d.val_mask.empty());
    CHECK(d.test_mask == std::vector<NodeId>{1});

    write_file(dir / "twice.csv", "3,train\n3,val\n");
    write_file(dir / "labels4.csv", "3,0\n");
    CHECK_THROWS_AS(load_labels_and_splits(dir / "labels4.csv", dir / "twice.csv"), ValidationError);

    write_file(dir / "two.csv", "0,2\n");
    write_file(dir / "one.csv", "0,train\n");
    const LabelData k3 = load_labels_and_splits(dir / "two.csv", dir / "one.csv");
    CHECK(k3.n_classes() == 3);
    CHECK(k3.one_hot(0, 2) == 1.0);
    CHECK(k3.one_hot.row(0).sum() == 1.0);

    write_file(dir / "neg.csv", "0,-1\n");
    CHECK_THROWS_AS(load_labels_and_splits(dir / "neg.csv", dir / "one.csv"), ParseError);
  }

  TEST_CASE("neighborhoods") {
    const Graph path = make_graph(3, {{0, 1}, {1, 2}});
    CHECK(neighborhood(path, 1) == std::vector<NodeId>{0, 2});
    CHECK(neighborhood(make_graph(2, {}), 0).empty());
    CHECK(neighborhood(complete_graph(4), 0) == std::vector<NodeId>{1, 2, 3});
  }

  TEST_CASE("perturbation delta") {
    const Graph a = make_graph(3, {{0, 1}});
    const PerturbationDelta d1 = perturbation_delta(a, make_graph(3, {{0, 1}, {1, 2}}));
    CHECK(d1.insertions == std::vector<Edge>{{1, 2}});
    CHECK(d1.deletions.empty());
    CHECK(perturbation_delta(a, a).empty());
    const PerturbationDelta d2 = perturbation_delta(a, make_graph(3, {{1, 2}}));
    CHECK(d2.insertions == std::vector<Edge>{{1, 2}});
    CHECK(d2.deletions == std::vector<Edge>{{0, 1}});
  }

  TEST_CASE("apply delta") {
    const Graph g = make_graph(3, {{0, 1}});
    CHECK(apply_delta(g, {3, {{1, 2}}, {}}) == make_graph(3, {{0, 1}, {1, 2}}));
    CHECK(apply_delta(g, {3, {}, {{0, 1}}}).num_edges() == 0);
    CHECK_THROWS_AS(apply_delta(g, {3, {{0, 1}}, {}}), ValidationError);
  }

  TEST_CASE("delta round trip on random pairs") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const std::size_t n = 2 + seed % 19;
      const Graph a = random_graph(n, 0.3, seed);
      const Graph b = random_graph(n, 0.3, seed + 1000);
      CHECK(apply_delta(a, perturbation_delta(a, b)) == b);
    }
  }

  TEST_CASE("neighbor lists are symmetric") {
    const Graph g = random_graph(15, 0.3, 5);
    for (NodeId u = 0; u < 15; ++u)
      for (NodeId v : g.neighbors(u)) {
        const auto back = g.neighbors(v);
        CHECK(std::find(back.begin(), back.end(), u) != back.end());
      }
  }

  TEST_CASE("pair ranks enumerate the upper triangle") {
    const std::size_t n = 7;
    std::set<std::uint64_t> seen;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) {
        const std::uint64_t r = pair_index(Edge(u, v), n);
        CHECK(pair_from_index(r, n) == Edge(u, v));
        seen.insert(r);
      }
    CHECK(seen.size() == n * (n - 1) / 2);
    CHECK(*seen.rbegin() == n * (n - 1) / 2 - 1);
  }

  TEST_CASE("graph hash depends on content only") {
    const Graph a = make_graph(4, {{0, 1}, {2, 3}});
    const Graph b = make_graph(4, {{3, 2}, {1, 0}});
    CHECK(graph_hash(a) == graph_hash(b));
    CHECK(graph_hash(a) != graph_hash(make_graph(4, {{0, 1}})));
    CHECK(graph_hash(a) != graph_hash(make_graph(5, {{0, 1}, {2, 3}})));
    CHECK(graph_hash(a).size() == 16);
  }
}
