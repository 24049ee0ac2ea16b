#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ganx/matrix.hpp"

namespace ganx {

using Edge = std::pair<int, int>;  // undirected, stored as (min, max)

// Undirected graph: symmetric binary adjacency with zero diagonal, one
// feature row per node, optional node labels / graph label.
struct Graph {
  std::size_t node_count = 0;
  Matrix adjacency;              // node_count x node_count
  Matrix features;               // node_count x f
  std::vector<int> node_labels;  // empty, or one per node
  std::optional<int> graph_label;

  // Throws std::invalid_argument on any structural invariant violation.
  void validate() const;

  // Undirected edges as (i, j) with i < j, lexicographically sorted.
  std::vector<Edge> undirected_edges() const;
  std::size_t undirected_edge_count() const;
};

// Symmetric normalization D^-1/2 (A + I) D^-1/2 where D is the degree matrix
// of A + I. Also accepts weighted adjacencies (entries >= 0), which is how
// generated edge masks re-enter message passing. An isolated node ends up
// with a 1 on the diagonal.
Matrix normalize_weighted(const Matrix& adjacency);
Matrix normalize_adjacency(const Graph& g);

struct KhopResult {
  Graph subgraph;
  std::vector<int> to_global;  // local index -> global node id
  std::vector<int> to_local;   // global node id -> local index, -1 if absent
  int center_local = -1;
};

// Induced subgraph on all nodes within `hops` edges of `center`. Local node
// order is ascending global id, so the extraction is deterministic.
KhopResult khop_subgraph(const Graph& g, int center, int hops);

// Per-edge importance scores in [0, 1], symmetric, supported only on edges
// of the graph it was produced for.
struct WeightMatrix {
  Matrix values;
};

// Validates the WeightMatrix invariants against g and throws if violated.
WeightMatrix make_weight_matrix(Matrix values, const Graph& g);

// A (possibly thresholded) explanation subgraph. `weighted` is the masked
// adjacency W (.) A; `edge_set` is filled by topk_edges. `adjacency_support`
// keeps the edge set of the input graph so top-K selection knows the full
// candidate region even where weights are zero.
struct Explanation {
  Matrix weighted;
  Matrix adjacency_support;
  std::vector<Edge> edge_set;
  std::optional<int> target;

  // Binary adjacency with 1 exactly on edge_set (both directions).
  Matrix binary() const;
};

// Exp = W (.) A, elementwise. Rejects masks whose support escapes A.
Explanation apply_mask(const Graph& g, const WeightMatrix& w);

// Keeps the min(k, |E|) highest-weight undirected edges. Ties break by
// ascending (min id, max id) so results never depend on traversal order.
Explanation topk_edges(const Explanation& exp, int k);

}  // namespace ganx
