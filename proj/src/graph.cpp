#include "ganx/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace ganx {

void Graph::validate() const {
  if (adjacency.rows != node_count || adjacency.cols != node_count)
    throw std::invalid_argument("Graph: adjacency must be node_count x node_count");
  if (features.rows != node_count)
    throw std::invalid_argument("Graph: one feature row per node required");
  if (!node_labels.empty() && node_labels.size() != node_count)
    throw std::invalid_argument("Graph: node_labels must be empty or one per node");
  for (std::size_t i = 0; i < node_count; ++i) {
    if (adjacency(i, i) != 0.0)
      throw std::invalid_argument("Graph: self-loop at node " + std::to_string(i));
    for (std::size_t j = 0; j < node_count; ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("Graph: adjacency entries must be 0 or 1");
      if (v != adjacency(j, i))
        throw std::invalid_argument("Graph: adjacency must be symmetric");
    }
  }
  if (!all_finite(features)) throw std::invalid_argument("Graph: non-finite feature");
}

std::vector<Edge> Graph::undirected_edges() const {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < node_count; ++i)
    for (std::size_t j = i + 1; j < node_count; ++j)
      if (adjacency(i, j) != 0.0)
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return edges;  // row-major scan is already (min, max) lexicographic order
}

std::size_t Graph::undirected_edge_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < node_count; ++i)
    for (std::size_t j = i + 1; j < node_count; ++j)
      if (adjacency(i, j) != 0.0) ++n;
  return n;
}

Matrix normalize_weighted(const Matrix& adjacency) {
  if (adjacency.rows != adjacency.cols)
    throw std::invalid_argument("normalize_weighted: square matrix required");
  const std::size_t n = adjacency.rows;
  Matrix out = adjacency;
  for (std::size_t i = 0; i < n; ++i) out(i, i) += 1.0;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += out(i, j);
    s[i] = 1.0 / std::sqrt(deg);
  }
  // Same operation order as the differentiable path: rows first, then cols.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) *= s[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) *= s[j];
  return out;
}

Matrix normalize_adjacency(const Graph& g) {
  g.validate();
  return normalize_weighted(g.adjacency);
}

KhopResult khop_subgraph(const Graph& g, int center, int hops) {
  if (center < 0 || static_cast<std::size_t>(center) >= g.node_count)
    throw std::invalid_argument("khop_subgraph: center out of range");
  if (hops < 1) throw std::invalid_argument("khop_subgraph: hops must be >= 1");

  std::vector<int> dist(g.node_count, -1);
  std::deque<int> queue;
  dist[static_cast<std::size_t>(center)] = 0;
  queue.push_back(center);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (dist[static_cast<std::size_t>(u)] == hops) continue;
    for (std::size_t v = 0; v < g.node_count; ++v) {
      if (g.adjacency(static_cast<std::size_t>(u), v) != 0.0 && dist[v] == -1) {
        dist[v] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(static_cast<int>(v));
      }
    }
  }

  KhopResult res;
  res.to_local.assign(g.node_count, -1);
  for (std::size_t v = 0; v < g.node_count; ++v) {
    if (dist[v] >= 0) {
      res.to_local[v] = static_cast<int>(res.to_global.size());
      res.to_global.push_back(static_cast<int>(v));
    }
  }
  res.center_local = res.to_local[static_cast<std::size_t>(center)];

  const std::size_t m = res.to_global.size();
  Graph& sub = res.subgraph;
  sub.node_count = m;
  sub.adjacency = Matrix(m, m);
  sub.features = Matrix(m, g.features.cols);
  if (!g.node_labels.empty()) sub.node_labels.resize(m);
  sub.graph_label = g.graph_label;
  for (std::size_t a = 0; a < m; ++a) {
    const auto ga = static_cast<std::size_t>(res.to_global[a]);
    for (std::size_t b = 0; b < m; ++b)
      sub.adjacency(a, b) = g.adjacency(ga, static_cast<std::size_t>(res.to_global[b]));
    for (std::size_t j = 0; j < g.features.cols; ++j) sub.features(a, j) = g.features(ga, j);
    if (!g.node_labels.empty()) sub.node_labels[a] = g.node_labels[ga];
  }
  return res;
}

WeightMatrix make_weight_matrix(Matrix values, const Graph& g) {
  if (values.rows != g.node_count || values.cols != g.node_count)
    throw std::invalid_argument("WeightMatrix: shape must match adjacency (" +
                                values.shape_str() + " vs " + g.adjacency.shape_str() + ")");
  for (std::size_t i = 0; i < values.rows; ++i)
    for (std::size_t j = 0; j < values.cols; ++j) {
      const double v = values(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("WeightMatrix: entry out of [0,1] at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (v != values(j, i))
        throw std::invalid_argument("WeightMatrix: not symmetric at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      if (v > 0.0 && g.adjacency(i, j) == 0.0)
        throw std::invalid_argument("WeightMatrix: support violation at (" + std::to_string(i) +
                                    "," + std::to_string(j) + "): weight on a non-edge");
    }
  return WeightMatrix{std::move(values)};
}

Matrix Explanation::binary() const {
  Matrix b(weighted.rows, weighted.cols);
  for (const auto& [i, j] : edge_set) {
    b(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    b(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
  }
  return b;
}

Explanation apply_mask(const Graph& g, const WeightMatrix& w) {
  if (w.values.rows != g.node_count || w.values.cols != g.node_count)
    throw std::invalid_argument("apply_mask: shape mismatch (" + w.values.shape_str() + " vs " +
                                g.adjacency.shape_str() + ")");
  Explanation exp;
  exp.weighted = Matrix(g.node_count, g.node_count);
  exp.adjacency_support = g.adjacency;
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t j = 0; j < g.node_count; ++j) {
      const double wv = w.values(i, j);
      const double av = g.adjacency(i, j);
      if (wv > 0.0 && av == 0.0)
        throw std::invalid_argument("apply_mask: support violation at (" + std::to_string(i) +
                                    "," + std::to_string(j) + "): weight on a non-edge");
      if (!(wv >= 0.0 && wv <= 1.0))
        throw std::invalid_argument("apply_mask: weight out of [0,1]");
      exp.weighted(i, j) = wv * av;
    }
  return exp;
}

Explanation topk_edges(const Explanation& exp, int k) {
  if (k < 1) throw std::invalid_argument("topk_edges: k must be >= 1");
  std::vector<Edge> candidates;
  const Matrix& support = exp.adjacency_support;
  for (std::size_t i = 0; i < support.rows; ++i)
    for (std::size_t j = i + 1; j < support.cols; ++j)
      if (support(i, j) != 0.0) candidates.emplace_back(static_cast<int>(i), static_cast<int>(j));

  std::stable_sort(candidates.begin(), candidates.end(), [&](const Edge& a, const Edge& b) {
    const double wa = exp.weighted(static_cast<std::size_t>(a.first),
                                   static_cast<std::size_t>(a.second));
    const double wb = exp.weighted(static_cast<std::size_t>(b.first),
                                   static_cast<std::size_t>(b.second));
    if (wa != wb) return wa > wb;
    return a < b;  // lexicographic (min id, max id) tie rule
  });

  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  Explanation out;
  out.adjacency_support = exp.adjacency_support;
  out.target = exp.target;
  out.edge_set.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(out.edge_set.begin(), out.edge_set.end());
  out.weighted = Matrix(exp.weighted.rows, exp.weighted.cols);
  for (const auto& [i, j] : out.edge_set) {
    out.weighted(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    out.weighted(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
  }
  return out;
}

}  // namespace ganx
