#include <algorithm>
#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "ganx/distill.hpp"
#include "ganx/rng.hpp"
#include "ganx/util.hpp"
#include "tu_fixture.hpp"

using ganx::DatasetBundle;
using ganx::DistilledTarget;
using ganx::Edge;
using ganx::Graph;
using ganx::Matrix;
using ganx::Rng;
using ganx::TargetModel;

namespace {

Graph random_small_graph(Rng& rng, std::size_t max_edges) {
  const std::size_t n = 4 + rng.index(3);  // 4..6 nodes
  Graph g;
  g.node_count = n;
  g.adjacency = Matrix(n, n);
  std::vector<Edge> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      all.emplace_back(static_cast<int>(i), static_cast<int>(j));
  rng.shuffle(all);
  const std::size_t count = std::min(max_edges, 2 + rng.index(all.size() - 1));
  for (std::size_t e = 0; e < count; ++e) {
    g.adjacency(static_cast<std::size_t>(all[e].first),
                static_cast<std::size_t>(all[e].second)) = 1.0;
    g.adjacency(static_cast<std::size_t>(all[e].second),
                static_cast<std::size_t>(all[e].first)) = 1.0;
  }
  g.features = Matrix(n, 4);
  for (double& v : g.features.data) v = rng.uniform(-1.0, 1.0);
  g.graph_label = 0;
  return g;
}

// Brute-force oracle: enumerate single-edge deletions through the public
// forward pass only, rank by loss increase with the lexicographic tie rule.
Edge brute_force_top_edge(const TargetModel& model, const Graph& g) {
  const Matrix probs = ganx::forward_probs(model, g);
  const int cls = ganx::argmax_row(probs, 0);
  const double base = -std::log(probs(0, static_cast<std::size_t>(cls)));
  Edge best{-1, -1};
  double best_delta = -1e300;
  for (const Edge& e : g.undirected_edges()) {
    Graph del = g;
    del.adjacency(static_cast<std::size_t>(e.first), static_cast<std::size_t>(e.second)) = 0.0;
    del.adjacency(static_cast<std::size_t>(e.second), static_cast<std::size_t>(e.first)) = 0.0;
    const Matrix p = ganx::forward_probs(model, del);
    const double delta = -std::log(p(0, static_cast<std::size_t>(cls))) - base;
    if (delta > best_delta) {  // first edge in lexicographic order wins ties
      best_delta = delta;
      best = e;
    }
  }
  return best;
}

TargetModel trained_toy_model() {
  DatasetBundle bundle = ganx::split_dataset(tufixture::make_bundle(40, 2), 2);
  ganx::TrainConfig cfg = ganx::TrainConfig::defaults_for(ganx::Task::kGraph);
  cfg.epochs = 40;
  cfg.patience = 40;
  return ganx::train_target(bundle, cfg);
}

}  // namespace

TEST_CASE("distill matches the brute-force deletion oracle on small graphs") {
  const TargetModel model = trained_toy_model();
  Rng rng(31);
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Graph g = random_small_graph(rng, 8);
    g.features = Matrix(g.node_count, 4);
    for (std::size_t v = 0; v < g.node_count; ++v) g.features(v, rng.index(4)) = 1.0;
    const DistilledTarget t = ganx::distill(model, g, std::nullopt, rep);
    if (t.degenerate) {
      // Both routes must then agree that no deletion increases the loss.
      const Matrix probs = ganx::forward_probs(model, g);
      const int cls = ganx::argmax_row(probs, 0);
      const double base = -std::log(probs(0, static_cast<std::size_t>(cls)));
      for (const Edge& e : g.undirected_edges()) {
        Graph del = g;
        del.adjacency(static_cast<std::size_t>(e.first),
                      static_cast<std::size_t>(e.second)) = 0.0;
        del.adjacency(static_cast<std::size_t>(e.second),
                      static_cast<std::size_t>(e.first)) = 0.0;
        const Matrix p = ganx::forward_probs(model, del);
        CHECK(-std::log(p(0, static_cast<std::size_t>(cls))) - base <= 0.0);
      }
      continue;
    }
    ++checked;
    // Top-ranked distilled edge: weight 1 with lexicographic tie handling.
    Edge top{-1, -1};
    for (const Edge& e : g.undirected_edges())
      if (t.weights(static_cast<std::size_t>(e.first), static_cast<std::size_t>(e.second)) ==
          1.0) {
        top = e;
        break;
      }
    CHECK(top == brute_force_top_edge(model, g));
  }
  CHECK(checked >= 40);  // degenerate cases must stay rare on a trained model
}

TEST_CASE("distilled weights live in [0,1] on the adjacency support") {
  const TargetModel model = trained_toy_model();
  Rng rng(5);
  const Graph g = random_small_graph(rng, 8);
  const DistilledTarget t = ganx::distill(model, g, std::nullopt, 0);
  double max_w = 0.0;
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t j = 0; j < g.node_count; ++j) {
      CHECK(t.weights(i, j) >= 0.0);
      CHECK(t.weights(i, j) <= 1.0);
      if (g.adjacency(i, j) == 0.0) CHECK(t.weights(i, j) == 0.0);
      CHECK(t.weights(i, j) == t.weights(j, i));
      max_w = std::max(max_w, t.weights(i, j));
    }
  if (!t.degenerate) CHECK(max_w == 1.0);
}

TEST_CASE("deleting the top distilled edge never decreases the loss") {
  const TargetModel model = trained_toy_model();
  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const Graph g = random_small_graph(rng, 8);
    const DistilledTarget t = ganx::distill(model, g, std::nullopt, rep);
    if (t.degenerate) continue;
    Edge top{-1, -1};
    for (const Edge& e : g.undirected_edges())
      if (t.weights(static_cast<std::size_t>(e.first), static_cast<std::size_t>(e.second)) ==
          1.0) {
        top = e;
        break;
      }
    Graph del = g;
    del.adjacency(static_cast<std::size_t>(top.first), static_cast<std::size_t>(top.second)) =
        0.0;
    del.adjacency(static_cast<std::size_t>(top.second), static_cast<std::size_t>(top.first)) =
        0.0;
    const Matrix probs = ganx::forward_probs(model, g);
    const int cls = ganx::argmax_row(probs, 0);
    const Matrix p = ganx::forward_probs(model, del);
    CHECK(-std::log(p(0, static_cast<std::size_t>(cls))) >= t.origin_loss);
  }
}

TEST_CASE("zero-sensitivity edges get zero weight") {
  // Two disconnected triangles; graph-level prediction pools both, but a
  // model trained on nothing (zero weights) is insensitive to every edge.
  TargetModel model = ganx::make_target_model(ganx::ModelKind::kGraph, 4, 2, 3);
  for (const auto& p : model.parameters()) p->value().fill(0.0);
  Graph g;
  g.node_count = 6;
  g.adjacency = Matrix(6, 6);
  for (const auto& [i, j] :
       std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}) {
    g.adjacency(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    g.adjacency(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
  }
  g.features = Matrix(6, 4, 0.5);
  const DistilledTarget t = ganx::distill(model, g, std::nullopt, 0);
  CHECK(t.degenerate);
  for (double v : t.weights.data) CHECK(v == 0.0);
}

TEST_CASE("distill_all: cache hits are bitwise identical, checksum invalidates") {
  const std::string cache = "test_tmp_distill";
  std::filesystem::remove_all(cache);
  const TargetModel model = trained_toy_model();
  DatasetBundle bundle = ganx::split_dataset(tufixture::make_bundle(15, 7), 1);

  const auto first = ganx::distill_all(model, bundle, cache, "checksum-a", 3);
  REQUIRE(!first.empty());
  const std::string inst_file =
      cache + "/inst_" + std::to_string(first[0].instance_id) + ".json";
  const std::string bytes_before = ganx::read_file(inst_file);

  const auto second = ganx::distill_all(model, bundle, cache, "checksum-a", 3);
  CHECK(ganx::read_file(inst_file) == bytes_before);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(ganx::approx_equal(first[i].weights, second[i].weights, 0.0));

  // A different model checksum recomputes and rewrites the cache entry.
  const auto third = ganx::distill_all(model, bundle, cache, "checksum-b", 3);
  std::string checksum;
  ganx::distilled_from_json(ganx::read_file(inst_file), &checksum);
  CHECK(checksum == "checksum-b");
}

TEST_CASE("distill_all on an empty train split returns an empty list") {
  const TargetModel model = trained_toy_model();
  DatasetBundle bundle = ganx::split_dataset(tufixture::make_bundle(15, 7), 1);
  bundle.split.test.insert(bundle.split.test.end(), bundle.split.train.begin(),
                           bundle.split.train.end());
  bundle.split.test.insert(bundle.split.test.end(), bundle.split.validation.begin(),
                           bundle.split.validation.end());
  bundle.split.train.clear();
  bundle.split.validation.clear();
  CHECK(ganx::distill_all(model, bundle, "", "x", 3).empty());
}
