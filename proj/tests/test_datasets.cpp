#include <algorithm>
#include <filesystem>
#include <set>

#include <doctest.h>

#include "ganx/datasets.hpp"
#include "ganx/util.hpp"
#include "tu_fixture.hpp"

using ganx::DatasetBundle;
using ganx::Graph;
using ganx::Matrix;
using ganx::Task;

namespace {

// Connected components of the subgraph induced on motif-labeled nodes.
std::vector<std::vector<int>> motif_components(const Graph& g) {
  std::vector<int> comp(g.node_count, -1);
  std::vector<std::vector<int>> out;
  for (std::size_t v = 0; v < g.node_count; ++v) {
    if (g.node_labels[v] < 1 || comp[v] != -1) continue;
    std::vector<int> stack = {static_cast<int>(v)}, members;
    comp[v] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (std::size_t w = 0; w < g.node_count; ++w)
        if (g.adjacency(static_cast<std::size_t>(u), w) != 0.0 && g.node_labels[w] >= 1 &&
            comp[w] == -1) {
          comp[w] = comp[static_cast<std::size_t>(u)];
          stack.push_back(static_cast<int>(w));
        }
    }
    out.push_back(std::move(members));
  }
  return out;
}

std::size_t degree_within(const Graph& g, int v, const std::vector<int>& nodes) {
  std::size_t d = 0;
  for (int w : nodes)
    if (g.adjacency(static_cast<std::size_t>(v), static_cast<std::size_t>(w)) != 0.0) ++d;
  return d;
}

const char* kTmp = "test_tmp_datasets";

}  // namespace

TEST_CASE("ba-shapes: counts, label histogram, house structure") {
  const DatasetBundle bundle = ganx::gen_ba_shapes(0);
  const Graph& g = bundle.single();
  CHECK(g.node_count == 700);
  CHECK(bundle.class_count == 4);

  std::vector<int> histogram(4, 0);
  for (int l : g.node_labels) ++histogram[static_cast<std::size_t>(l)];
  CHECK(histogram[0] == 300);
  CHECK(histogram[1] == 80);
  CHECK(histogram[2] == 160);
  CHECK(histogram[3] == 160);

  // Every house is a 5-node component with 6 internal edges; roles check out.
  const auto houses = motif_components(g);
  CHECK(houses.size() == 80);
  for (const auto& house : houses) {
    CHECK(house.size() == 5);
    std::size_t internal_deg_sum = 0;
    int roofs = 0;
    for (int v : house) {
      internal_deg_sum += degree_within(g, v, house);
      if (g.node_labels[static_cast<std::size_t>(v)] == 1) ++roofs;
    }
    CHECK(internal_deg_sum == 12);  // 6 undirected edges
    CHECK(roofs == 1);
  }
}

TEST_CASE("ba-shapes: base graph stays connected without motif nodes") {
  const DatasetBundle bundle = ganx::gen_ba_shapes(1);
  const Graph& g = bundle.single();
  // BFS over the first 300 nodes using only base-base edges.
  std::vector<bool> seen(300, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  std::size_t count = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++count;
    for (int w = 0; w < 300; ++w)
      if (g.adjacency(static_cast<std::size_t>(u), static_cast<std::size_t>(w)) != 0.0 &&
          !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
  }
  CHECK(count == 300);
}

TEST_CASE("tree-cycles: tree size, cycle structure, class count") {
  const DatasetBundle bundle = ganx::gen_tree_cycles(0);
  const Graph& g = bundle.single();
  CHECK(bundle.class_count == 2);
  CHECK(g.node_count == 511 + 80 * 6);

  int tree_nodes = 0;
  for (int l : g.node_labels)
    if (l == 0) ++tree_nodes;
  CHECK(tree_nodes == 511);  // 2^9 - 1

  // Class-1 induced subgraph is exactly 80 disjoint 6-cycles.
  const auto cycles = motif_components(g);
  CHECK(cycles.size() == 80);
  for (const auto& cycle : cycles) {
    CHECK(cycle.size() == 6);
    for (int v : cycle) CHECK(degree_within(g, v, cycle) == 2);
  }
}

TEST_CASE("generators are reproducible; different seeds differ") {
  CHECK(ganx::bundle_to_json(ganx::gen_tree_cycles(7)) ==
        ganx::bundle_to_json(ganx::gen_tree_cycles(7)));
  CHECK(ganx::bundle_to_json(ganx::gen_ba_shapes(3)) !=
        ganx::bundle_to_json(ganx::gen_ba_shapes(4)));
}

TEST_CASE("split_dataset: sizes, determinism, disjointness") {
  DatasetBundle bundle = tufixture::make_bundle(100, 5);
  bundle = ganx::split_dataset(std::move(bundle), 0);
  CHECK(bundle.split.train.size() == 80);
  CHECK(bundle.split.validation.size() == 10);
  CHECK(bundle.split.test.size() == 10);
  bundle.validate();  // checks the partition

  // floor arithmetic at n = 4337
  DatasetBundle big = tufixture::make_bundle(20, 5);
  big.graphs.resize(20);
  // (synthesizing 4337 graphs is wasteful; check the arithmetic directly)
  const std::size_t n = 4337;
  CHECK(n * 8 / 10 == 3469);
  CHECK(n / 10 == 433);
  CHECK(n - 3469 - 433 == 435);

  DatasetBundle again = ganx::split_dataset(tufixture::make_bundle(100, 5), 0);
  CHECK(again.split.train == bundle.split.train);
  CHECK(again.split.test == bundle.split.test);

  DatasetBundle tiny = tufixture::make_bundle(9, 5);
  CHECK_THROWS_AS(ganx::split_dataset(std::move(tiny), 0), std::invalid_argument);
}

TEST_CASE("tu loader: handcrafted triangle + path fixture") {
  const std::string dir = kTmp;
  std::filesystem::remove_all(dir);
  ganx::write_file(dir + std::string("/tiny_A.txt"),
                   "1, 2\n2, 1\n1, 3\n3, 1\n2, 3\n3, 2\n4, 5\n5, 4\n");
  ganx::write_file(dir + std::string("/tiny_graph_indicator.txt"), "1\n1\n1\n2\n2\n");
  ganx::write_file(dir + std::string("/tiny_graph_labels.txt"), "1\n-1\n");
  ganx::write_file(dir + std::string("/tiny_node_labels.txt"), "0\n1\n2\n0\n1\n");

  const DatasetBundle bundle =
      ganx::load_tu(ganx::TuRawFiles::locate(dir, "tiny"), "tiny");
  CHECK(bundle.task == Task::kGraph);
  CHECK(bundle.graphs.size() == 2);
  CHECK(bundle.class_count == 2);

  const Graph& tri = bundle.graphs[0];
  CHECK(tri.node_count == 3);
  CHECK(tri.undirected_edge_count() == 3);
  CHECK(*tri.graph_label == 1);  // labels {-1, 1} map to {0, 1}
  CHECK(tri.features.cols == 3);
  CHECK(tri.features(1, 1) == 1.0);

  const Graph& path = bundle.graphs[1];
  CHECK(path.node_count == 2);
  CHECK(path.undirected_edge_count() == 1);
  CHECK(*path.graph_label == 0);
}

TEST_CASE("tu loader: file+line diagnostics on malformed input") {
  const std::string dir = kTmp;
  std::filesystem::remove_all(dir);
  ganx::write_file(dir + std::string("/bad_graph_indicator.txt"), "1\n1\n2\n2\n");
  ganx::write_file(dir + std::string("/bad_graph_labels.txt"), "0\n1\n");

  SUBCASE("dangling node id") {
    ganx::write_file(dir + std::string("/bad_A.txt"), "1, 2\n2, 9\n");
    CHECK_THROWS_WITH_AS(ganx::load_tu(ganx::TuRawFiles::locate(dir, "bad"), "bad"),
                         doctest::Contains("bad_A.txt:2"), std::runtime_error);
  }
  SUBCASE("cross-graph edge") {
    ganx::write_file(dir + std::string("/bad_A.txt"), "1, 2\n2, 3\n");
    CHECK_THROWS_WITH_AS(ganx::load_tu(ganx::TuRawFiles::locate(dir, "bad"), "bad"),
                         doctest::Contains("crosses graphs"), std::runtime_error);
  }
  SUBCASE("missing labels") {
    ganx::write_file(dir + std::string("/bad_A.txt"), "1, 2\n");
    ganx::write_file(dir + std::string("/bad_graph_labels.txt"), "0\n");
    CHECK_THROWS_WITH_AS(ganx::load_tu(ganx::TuRawFiles::locate(dir, "bad"), "bad"),
                         doctest::Contains("expected 2 graph labels"), std::runtime_error);
  }
}

TEST_CASE("tu round-trip: write then reload gives an equal bundle") {
  const std::string dir = kTmp;
  std::filesystem::remove_all(dir);
  const DatasetBundle original = tufixture::write_fixture(dir, "fix", 24, 11);
  const DatasetBundle reloaded =
      ganx::load_tu(ganx::TuRawFiles::locate(dir, "fix"), "fix");

  REQUIRE(reloaded.graphs.size() == original.graphs.size());
  CHECK(reloaded.class_count == original.class_count);
  for (std::size_t i = 0; i < original.graphs.size(); ++i) {
    const Graph& a = original.graphs[i];
    const Graph& b = reloaded.graphs[i];
    CHECK(a.node_count == b.node_count);
    CHECK(ganx::approx_equal(a.adjacency, b.adjacency, 0.0));
    CHECK(ganx::approx_equal(a.features, b.features, 0.0));
    CHECK(a.node_labels == b.node_labels);
    CHECK(*a.graph_label == *b.graph_label);
  }
}

TEST_CASE("node-task JSON round-trip is byte-stable") {
  DatasetBundle bundle = ganx::split_dataset(ganx::gen_tree_cycles(2), 2);
  const std::string text = ganx::bundle_to_json(bundle);
  const DatasetBundle reloaded = ganx::bundle_from_json(text);
  CHECK(ganx::bundle_to_json(reloaded) == text);
  CHECK(reloaded.split.train == bundle.split.train);
}

TEST_CASE("instance views and explanation instances") {
  DatasetBundle bundle = ganx::split_dataset(ganx::gen_tree_cycles(0), 0);
  const auto motif = ganx::explanation_instances(bundle, bundle.split.test);
  CHECK(!motif.empty());
  for (int id : motif)
    CHECK(bundle.single().node_labels[static_cast<std::size_t>(id)] == 1);

  const auto view = ganx::make_instance_view(bundle, motif[0], 3);
  CHECK(view.target_local >= 0);
  CHECK(view.graph.node_count == view.to_global.size());
  CHECK(view.to_global[static_cast<std::size_t>(view.target_local)] == motif[0]);

  DatasetBundle gb = ganx::split_dataset(tufixture::make_bundle(30, 3), 1);
  const auto ids = ganx::explanation_instances(gb, gb.split.test);
  std::set<int> test_set(gb.split.test.begin(), gb.split.test.end());
  CHECK(ids.size() == test_set.size());
  const auto gview = ganx::make_instance_view(gb, ids[0], 3);
  CHECK(gview.target_local == -1);
  CHECK(gview.graph.node_count == gb.graphs[static_cast<std::size_t>(ids[0])].node_count);
}

TEST_CASE("subsample_graphs caps the graph count deterministically") {
  DatasetBundle bundle = tufixture::make_bundle(50, 9);
  const DatasetBundle sub = ganx::subsample_graphs(bundle, 20, 4);
  CHECK(sub.graphs.size() == 20);
  const DatasetBundle sub2 = ganx::subsample_graphs(bundle, 20, 4);
  for (std::size_t i = 0; i < sub.graphs.size(); ++i)
    CHECK(ganx::approx_equal(sub.graphs[i].adjacency, sub2.graphs[i].adjacency, 0.0));
  CHECK(ganx::subsample_graphs(bundle, 0, 4).graphs.size() == 50);
}
