#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "ganx/gnn.hpp"
#include "ganx/graph.hpp"
#include "ganx/rng.hpp"

using ganx::Edge;
using ganx::Explanation;
using ganx::Graph;
using ganx::Matrix;
using ganx::Rng;
using ganx::WeightMatrix;

namespace {

Graph make_graph(std::size_t n, const std::vector<Edge>& edges, std::size_t fdim = 3) {
  Graph g;
  g.node_count = n;
  g.adjacency = Matrix(n, n);
  for (const auto& [i, j] : edges) {
    g.adjacency(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    g.adjacency(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
  }
  g.features = Matrix(n, fdim, 1.0);
  return g;
}

Graph random_graph(std::size_t n, double p, Rng& rng, std::size_t fdim = 3) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  Graph g = make_graph(n, edges, fdim);
  for (double& v : g.features.data) v = rng.uniform(-1.0, 1.0);
  return g;
}

}  // namespace

TEST_CASE("normalize_adjacency: triangle, isolated node, 2-path") {
  const Graph k3 = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const Matrix ak3 = ganx::normalize_adjacency(k3);
  for (double v : ak3.data) CHECK(v == doctest::Approx(1.0 / 3.0));

  const Graph isolated = make_graph(1, {});
  const Matrix ai = ganx::normalize_adjacency(isolated);
  CHECK(ai(0, 0) == doctest::Approx(1.0));

  const Graph path2 = make_graph(2, {{0, 1}});
  const Matrix ap = ganx::normalize_adjacency(path2);
  for (double v : ap.data) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("normalize preserves symmetry on random graphs") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Graph g = random_graph(12, 0.3, rng);
    const Matrix a = ganx::normalize_adjacency(g);
    for (std::size_t i = 0; i < a.rows; ++i) {
      CHECK(a(i, i) > 0.0);
      for (std::size_t j = 0; j < a.cols; ++j) {
        CHECK(a(i, j) >= 0.0);
        CHECK(a(i, j) == doctest::Approx(a(j, i)));
      }
    }
  }
}

TEST_CASE("graph invariant violations are rejected") {
  Graph g = make_graph(3, {{0, 1}});
  g.adjacency(1, 1) = 1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.adjacency(1, 1) = 0.0;
  g.adjacency(0, 2) = 1.0;  // asymmetric
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.adjacency(0, 2) = 0.0;
  g.adjacency(0, 1) = 0.5;  // non-binary
  g.adjacency(1, 0) = 0.5;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("khop_subgraph: isolated node, middle of a path, full cycle") {
  const Graph isolated = make_graph(4, {{1, 2}});
  const auto k0 = ganx::khop_subgraph(isolated, 0, 3);
  CHECK(k0.subgraph.node_count == 1);
  CHECK(k0.to_global == std::vector<int>{0});

  const Graph path5 = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const auto k1 = ganx::khop_subgraph(path5, 2, 1);
  CHECK(k1.subgraph.node_count == 3);
  CHECK(k1.to_global == std::vector<int>{1, 2, 3});
  CHECK(k1.center_local == 1);
  CHECK(k1.subgraph.undirected_edge_count() == 2);

  const Graph cycle6 = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  const auto k2 = ganx::khop_subgraph(cycle6, 4, 3);
  CHECK(k2.subgraph.node_count == 6);
  CHECK(k2.subgraph.undirected_edge_count() == 6);
}

TEST_CASE("khop_subgraph rejects bad arguments") {
  const Graph g = make_graph(3, {{0, 1}});
  CHECK_THROWS_AS(ganx::khop_subgraph(g, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(ganx::khop_subgraph(g, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ganx::khop_subgraph(g, 0, 0), std::invalid_argument);
}

TEST_CASE("apply_mask: identity, empty, and listed-weights cases") {
  const Graph g = make_graph(3, {{0, 1}, {1, 2}});

  const WeightMatrix ones = ganx::make_weight_matrix(g.adjacency, g);
  const Explanation all = ganx::apply_mask(g, ones);
  CHECK(ganx::approx_equal(all.weighted, g.adjacency, 0.0));

  const WeightMatrix zeros = ganx::make_weight_matrix(Matrix(3, 3), g);
  const Explanation none = ganx::apply_mask(g, zeros);
  for (double v : none.weighted.data) CHECK(v == 0.0);

  Matrix w(3, 3);
  w(0, 1) = w(1, 0) = 0.9;
  w(1, 2) = w(2, 1) = 0.2;
  const Explanation exp = ganx::apply_mask(g, ganx::make_weight_matrix(w, g));
  CHECK(exp.weighted(0, 1) == 0.9);
  CHECK(exp.weighted(1, 0) == 0.9);
  CHECK(exp.weighted(2, 1) == 0.2);
  CHECK(exp.weighted(0, 2) == 0.0);
}

TEST_CASE("mask support violations signal a generator bug") {
  const Graph g = make_graph(3, {{0, 1}});
  Matrix w(3, 3);
  w(0, 2) = w(2, 0) = 0.4;  // not an edge
  CHECK_THROWS_AS(ganx::make_weight_matrix(w, g), std::invalid_argument);

  Matrix asym(3, 3);
  asym(0, 1) = 0.4;
  CHECK_THROWS_AS(ganx::make_weight_matrix(asym, g), std::invalid_argument);

  Matrix big(3, 3);
  big(0, 1) = big(1, 0) = 1.5;
  CHECK_THROWS_AS(ganx::make_weight_matrix(big, g), std::invalid_argument);
}

TEST_CASE("topk_edges: ordering, saturation, tie rule") {
  const Graph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  Matrix w(4, 4);
  auto set = [&](int i, int j, double v) {
    w(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
    w(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
  };
  set(0, 1, 0.9);
  set(1, 2, 0.5);
  set(2, 3, 0.1);
  const Explanation exp = ganx::apply_mask(g, ganx::make_weight_matrix(w, g));

  const Explanation top2 = ganx::topk_edges(exp, 2);
  CHECK(top2.edge_set == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(top2.binary()(0, 1) == 1.0);
  CHECK(top2.binary()(2, 3) == 0.0);

  const Explanation all = ganx::topk_edges(exp, 10);
  CHECK(all.edge_set.size() == 3);

  set(0, 1, 0.5);  // tie with (1,2): lexicographically smaller edge wins
  const Explanation tied =
      ganx::topk_edges(ganx::apply_mask(g, ganx::make_weight_matrix(w, g)), 1);
  CHECK(tied.edge_set == std::vector<Edge>{{0, 1}});

  CHECK_THROWS_AS(ganx::topk_edges(exp, 0), std::invalid_argument);
}

TEST_CASE("topk_edges is independent of weight scaling") {
  Rng rng(9);
  const Graph g = random_graph(10, 0.4, rng);
  Matrix w(10, 10);
  for (const auto& [i, j] : g.undirected_edges()) {
    const double v = rng.uniform(0.05, 1.0);
    w(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
    w(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
  }
  const Explanation base = ganx::apply_mask(g, ganx::make_weight_matrix(w, g));
  const auto ref = ganx::topk_edges(base, 5).edge_set;
  for (double c : {0.9, 0.5, 0.1}) {
    Matrix scaled = w;
    for (double& v : scaled.data) v *= c;
    const Explanation exp = ganx::apply_mask(g, ganx::make_weight_matrix(scaled, g));
    CHECK(ganx::topk_edges(exp, 5).edge_set == ref);
  }
}

TEST_CASE("masked forward on a subgraph indicator equals the subgraph forward") {
  // Message-passing consistency: zeroing all edges outside an induced
  // subgraph reproduces the forward pass of that subgraph exactly.
  Rng rng(21);
  const Graph g = random_graph(14, 0.25, rng, 4);
  const auto model = ganx::make_target_model(ganx::ModelKind::kNode, 4, 3, 17);

  const auto k = ganx::khop_subgraph(g, 3, 2);
  Matrix indicator(g.node_count, g.node_count);
  for (std::size_t a = 0; a < k.subgraph.node_count; ++a)
    for (std::size_t b = 0; b < k.subgraph.node_count; ++b)
      if (k.subgraph.adjacency(a, b) != 0.0)
        indicator(static_cast<std::size_t>(k.to_global[a]),
                  static_cast<std::size_t>(k.to_global[b])) = 1.0;

  const WeightMatrix mask = ganx::make_weight_matrix(indicator, g);
  const Matrix masked = ganx::forward_probs(model, g, &mask);
  const Matrix sub = ganx::forward_probs(model, k.subgraph);
  for (std::size_t a = 0; a < k.subgraph.node_count; ++a)
    for (std::size_t c = 0; c < sub.cols; ++c)
      CHECK(std::abs(sub(a, c) - masked(static_cast<std::size_t>(k.to_global[a]), c)) <=
            1e-12);
}
