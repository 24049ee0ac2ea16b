#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganx/graph.hpp"

namespace ganx {

enum class Task { kNode, kGraph };

struct Split {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
  bool empty() const { return train.empty() && validation.empty() && test.empty(); }
};

// A dataset plus its train/validation/test split. Node-classification
// bundles hold a single graph and split node indices; graph-classification
// bundles split graph indices.
struct DatasetBundle {
  std::string name;
  Task task = Task::kNode;
  std::vector<Graph> graphs;
  int class_count = 0;
  Split split;

  const Graph& single() const;
  std::size_t instance_count() const;
  void validate() const;
};

// Barabasi-Albert base graph on 300 nodes (m = 5) with 80 five-node house
// motifs (4-cycle base + roof, 6 intra-motif edges), each attached by one
// edge to a uniformly random base node. Labels: 0 base, 1 roof, 2 middle
// pair, 3 bottom pair. Features are constant all-ones vectors so that the
// task is purely structural.
DatasetBundle gen_ba_shapes(std::uint64_t seed);

// Balanced binary tree of depth 8 (511 nodes) with 80 six-node cycle motifs,
// each attached by one edge to a uniformly random tree node. Labels:
// 0 tree, 1 cycle.
DatasetBundle gen_tree_cycles(std::uint64_t seed);

// Standard TU plain-text layout. node_labels / edge_labels may be empty
// (absent).
struct TuRawFiles {
  std::string a;
  std::string graph_indicator;
  std::string graph_labels;
  std::string node_labels;
  std::string edge_labels;

  // Builds <dir>/<name>_A.txt etc.; optional members are left empty when the
  // file does not exist.
  static TuRawFiles locate(const std::string& dir, const std::string& name);
};

// Parses the TU files into one Graph per graph id. Node features are the
// one-hot of the node label; when node labels are absent, the degree one-hot
// capped at 10 is used instead. Malformed input is rejected with a
// file:line diagnostic.
DatasetBundle load_tu(const TuRawFiles& files, const std::string& name);

// Writes a graph-classification bundle back out in the same TU layout.
void write_tu(const DatasetBundle& bundle, const std::string& dir, const std::string& name);

// Deterministic 80/10/10 shuffle-split over instances (floor(0.8n) /
// floor(0.1n) / remainder). Requires at least 10 instances.
DatasetBundle split_dataset(DatasetBundle bundle, std::uint64_t seed);

// JSON serialization of a node-classification bundle:
// {task, class_count, nodes, edges, labels, features, name, split}.
std::string bundle_to_json(const DatasetBundle& bundle);
DatasetBundle bundle_from_json(const std::string& text);

// Keeps the first `max_graphs` graphs of a shuffled (by seed) graph-task
// bundle; the split is cleared and must be recomputed.
DatasetBundle subsample_graphs(DatasetBundle bundle, int max_graphs, std::uint64_t seed);

// One explanation instance: the graph the explainer actually sees. For node
// tasks this is the `hops`-hop computation subgraph around the node; for
// graph tasks it is the whole graph.
struct InstanceView {
  int instance_id = -1;
  Graph graph;
  int target_local = -1;         // explained node in local ids; -1 for graph tasks
  std::vector<int> to_global;    // local node id -> dataset node id
};

InstanceView make_instance_view(const DatasetBundle& bundle, int instance, int hops);

// Instances eligible for explanation in the given split part: motif-labeled
// nodes (label >= 1) for node tasks, every graph for graph tasks.
std::vector<int> explanation_instances(const DatasetBundle& bundle,
                                       const std::vector<int>& split_part);

}  // namespace ganx
