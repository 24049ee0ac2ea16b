#include "ganx/datasets.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ganx/rng.hpp"
#include "ganx/util.hpp"

namespace ganx {

namespace {

constexpr int kSyntheticFeatureDim = 10;

void add_edge(Matrix& adj, int i, int j) {
  adj(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
  adj(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
}

}  // namespace

const Graph& DatasetBundle::single() const {
  if (task != Task::kNode || graphs.size() != 1)
    throw std::logic_error("DatasetBundle::single: not a single-graph node task");
  return graphs[0];
}

std::size_t DatasetBundle::instance_count() const {
  return task == Task::kNode ? single().node_count : graphs.size();
}

void DatasetBundle::validate() const {
  if (graphs.empty()) throw std::invalid_argument("DatasetBundle: no graphs");
  if (class_count < 2) throw std::invalid_argument("DatasetBundle: class_count must be >= 2");
  for (const Graph& g : graphs) {
    g.validate();
    for (int l : g.node_labels)
      if (task == Task::kNode && (l < 0 || l >= class_count))
        throw std::invalid_argument("DatasetBundle: node label out of range");
    if (task == Task::kGraph) {
      if (!g.graph_label.has_value())
        throw std::invalid_argument("DatasetBundle: missing graph label");
      if (*g.graph_label < 0 || *g.graph_label >= class_count)
        throw std::invalid_argument("DatasetBundle: graph label out of range");
    }
  }
  if (!split.empty()) {
    std::vector<int> all;
    for (const auto* part : {&split.train, &split.validation, &split.test})
      all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    if (all.size() != instance_count() ||
        std::adjacent_find(all.begin(), all.end()) != all.end() || all.front() != 0 ||
        static_cast<std::size_t>(all.back()) != instance_count() - 1)
      throw std::invalid_argument("DatasetBundle: split must be a disjoint exhaustive partition");
  }
}

DatasetBundle gen_ba_shapes(std::uint64_t seed) {
  constexpr int kBaseNodes = 300;
  constexpr int kAttach = 5;  // edges per new node
  constexpr int kHouses = 80;
  constexpr int kTotal = kBaseNodes + 5 * kHouses;

  Rng rng(seed);
  Graph g;
  g.node_count = kTotal;
  g.adjacency = Matrix(kTotal, kTotal);
  g.features = Matrix(kTotal, kSyntheticFeatureDim, 1.0);
  g.node_labels.assign(kTotal, 0);

  // Seed clique on the first kAttach nodes, then preferential attachment.
  // `repeated` holds each node once per unit of degree.
  std::vector<int> repeated;
  for (int i = 0; i < kAttach; ++i)
    for (int j = i + 1; j < kAttach; ++j) {
      add_edge(g.adjacency, i, j);
      repeated.push_back(i);
      repeated.push_back(j);
    }
  for (int v = kAttach; v < kBaseNodes; ++v) {
    std::set<int> targets;
    while (targets.size() < static_cast<std::size_t>(kAttach))
      targets.insert(repeated[rng.index(repeated.size())]);
    for (int t : targets) {
      add_edge(g.adjacency, v, t);
      repeated.push_back(v);
      repeated.push_back(t);
    }
  }

  // Houses: bottom pair (b1, b2), middle pair (m1, m2), roof r.
  // Square b1-b2-m2-m1 plus the two roof edges; b1 anchors to the base.
  for (int h = 0; h < kHouses; ++h) {
    const int b1 = kBaseNodes + 5 * h;
    const int b2 = b1 + 1;
    const int m1 = b1 + 2;
    const int m2 = b1 + 3;
    const int r = b1 + 4;
    add_edge(g.adjacency, b1, b2);
    add_edge(g.adjacency, b1, m1);
    add_edge(g.adjacency, b2, m2);
    add_edge(g.adjacency, m1, m2);
    add_edge(g.adjacency, m1, r);
    add_edge(g.adjacency, m2, r);
    add_edge(g.adjacency, b1, static_cast<int>(rng.index(kBaseNodes)));
    g.node_labels[static_cast<std::size_t>(r)] = 1;
    g.node_labels[static_cast<std::size_t>(m1)] = 2;
    g.node_labels[static_cast<std::size_t>(m2)] = 2;
    g.node_labels[static_cast<std::size_t>(b1)] = 3;
    g.node_labels[static_cast<std::size_t>(b2)] = 3;
  }

  DatasetBundle bundle;
  bundle.name = "ba-shapes";
  bundle.task = Task::kNode;
  bundle.graphs.push_back(std::move(g));
  bundle.class_count = 4;
  bundle.validate();
  return bundle;
}

DatasetBundle gen_tree_cycles(std::uint64_t seed) {
  constexpr int kTreeNodes = 511;  // balanced binary tree of depth 8
  constexpr int kCycles = 80;
  constexpr int kCycleLen = 6;
  constexpr int kTotal = kTreeNodes + kCycles * kCycleLen;

  Rng rng(seed);
  Graph g;
  g.node_count = kTotal;
  g.adjacency = Matrix(kTotal, kTotal);
  g.features = Matrix(kTotal, kSyntheticFeatureDim, 1.0);
  g.node_labels.assign(kTotal, 0);

  for (int v = 1; v < kTreeNodes; ++v) add_edge(g.adjacency, v, (v - 1) / 2);

  for (int c = 0; c < kCycles; ++c) {
    const int base = kTreeNodes + c * kCycleLen;
    for (int k = 0; k < kCycleLen; ++k) {
      add_edge(g.adjacency, base + k, base + (k + 1) % kCycleLen);
      g.node_labels[static_cast<std::size_t>(base + k)] = 1;
    }
    add_edge(g.adjacency, base, static_cast<int>(rng.index(kTreeNodes)));
  }

  DatasetBundle bundle;
  bundle.name = "tree-cycles";
  bundle.task = Task::kNode;
  bundle.graphs.push_back(std::move(g));
  bundle.class_count = 2;
  bundle.validate();
  return bundle;
}

namespace {

struct TuLine {
  std::string file;
  int line;
  std::string text;
};

[[noreturn]] void tu_error(const std::string& file, int line, const std::string& what) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

std::vector<TuLine> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open TU file: " + path);
  std::vector<TuLine> lines;
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    // Trim whitespace and CR; skip fully blank lines at EOF.
    std::string t;
    for (char c : raw)
      if (c != '\r') t.push_back(c);
    std::size_t b = t.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = t.find_last_not_of(" \t");
    lines.push_back(TuLine{path, n, t.substr(b, e - b + 1)});
  }
  return lines;
}

long parse_int(const TuLine& l, const std::string& token) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    tu_error(l.file, l.line, "expected an integer, got '" + token + "'");
  }
}

}  // namespace

TuRawFiles TuRawFiles::locate(const std::string& dir, const std::string& name) {
  auto path = [&](const std::string& suffix) {
    return (std::filesystem::path(dir) / (name + suffix)).string();
  };
  TuRawFiles f;
  f.a = path("_A.txt");
  f.graph_indicator = path("_graph_indicator.txt");
  f.graph_labels = path("_graph_labels.txt");
  if (file_exists(path("_node_labels.txt"))) f.node_labels = path("_node_labels.txt");
  if (file_exists(path("_edge_labels.txt"))) f.edge_labels = path("_edge_labels.txt");
  return f;
}

DatasetBundle load_tu(const TuRawFiles& files, const std::string& name) {
  const auto indicator_lines = read_lines(files.graph_indicator);
  const std::size_t node_count = indicator_lines.size();
  if (node_count == 0) throw std::runtime_error(files.graph_indicator + ": empty file");

  std::vector<int> node_graph(node_count);
  int graph_count = 0;
  for (std::size_t k = 0; k < node_count; ++k) {
    const long gid = parse_int(indicator_lines[k], indicator_lines[k].text);
    if (gid < 1)
      tu_error(indicator_lines[k].file, indicator_lines[k].line, "graph id must be >= 1");
    node_graph[k] = static_cast<int>(gid - 1);
    graph_count = std::max(graph_count, static_cast<int>(gid));
  }

  const auto label_lines = read_lines(files.graph_labels);
  if (label_lines.size() != static_cast<std::size_t>(graph_count))
    throw std::runtime_error(files.graph_labels + ": expected " + std::to_string(graph_count) +
                             " graph labels, got " + std::to_string(label_lines.size()));
  std::vector<long> raw_graph_labels(label_lines.size());
  std::set<long> distinct_glabels;
  for (std::size_t i = 0; i < label_lines.size(); ++i) {
    raw_graph_labels[i] = parse_int(label_lines[i], label_lines[i].text);
    distinct_glabels.insert(raw_graph_labels[i]);
  }
  std::map<long, int> glabel_map;
  for (long l : distinct_glabels) glabel_map.emplace(l, static_cast<int>(glabel_map.size()));

  // Node labels mapped to a dense one-hot; absent file -> degree one-hot.
  std::vector<int> raw_node_labels;
  std::map<long, int> nlabel_map;
  if (!files.node_labels.empty()) {
    const auto nl = read_lines(files.node_labels);
    if (nl.size() != node_count)
      throw std::runtime_error(files.node_labels + ": expected " + std::to_string(node_count) +
                               " node labels, got " + std::to_string(nl.size()));
    std::set<long> distinct;
    std::vector<long> raw(node_count);
    for (std::size_t k = 0; k < node_count; ++k) {
      raw[k] = parse_int(nl[k], nl[k].text);
      distinct.insert(raw[k]);
    }
    for (long l : distinct) nlabel_map.emplace(l, static_cast<int>(nlabel_map.size()));
    raw_node_labels.resize(node_count);
    for (std::size_t k = 0; k < node_count; ++k) raw_node_labels[k] = nlabel_map.at(raw[k]);
  }

  // Edges: "i, j" with 1-based global node ids, endpoints in the same graph.
  struct RawEdge {
    int u, v;
  };
  std::vector<RawEdge> edges;
  for (const TuLine& l : read_lines(files.a)) {
    const std::size_t comma = l.text.find(',');
    if (comma == std::string::npos) tu_error(l.file, l.line, "expected 'i, j'");
    std::string left = l.text.substr(0, comma);
    std::string right = l.text.substr(comma + 1);
    auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    strip(left);
    strip(right);
    const long u = parse_int(l, left);
    const long v = parse_int(l, right);
    if (u < 1 || v < 1 || u > static_cast<long>(node_count) || v > static_cast<long>(node_count))
      tu_error(l.file, l.line, "dangling node id " + std::to_string(u > static_cast<long>(node_count) || u < 1 ? u : v));
    if (u == v) tu_error(l.file, l.line, "self-loop at node " + std::to_string(u));
    if (node_graph[static_cast<std::size_t>(u - 1)] != node_graph[static_cast<std::size_t>(v - 1)])
      tu_error(l.file, l.line, "edge crosses graphs (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    edges.push_back(RawEdge{static_cast<int>(u - 1), static_cast<int>(v - 1)});
  }

  // Group nodes per graph; local order = ascending global id.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(graph_count));
  for (std::size_t k = 0; k < node_count; ++k)
    members[static_cast<std::size_t>(node_graph[k])].push_back(static_cast<int>(k));
  std::vector<int> local_of(node_count);
  for (auto& m : members)
    for (std::size_t a = 0; a < m.size(); ++a) local_of[static_cast<std::size_t>(m[a])] = static_cast<int>(a);

  const std::size_t feat_dim =
      raw_node_labels.empty() ? 10 : nlabel_map.size();

  DatasetBundle bundle;
  bundle.name = name;
  bundle.task = Task::kGraph;
  bundle.class_count = static_cast<int>(glabel_map.size());
  bundle.graphs.resize(static_cast<std::size_t>(graph_count));
  for (int gi = 0; gi < graph_count; ++gi) {
    Graph& g = bundle.graphs[static_cast<std::size_t>(gi)];
    const auto& m = members[static_cast<std::size_t>(gi)];
    if (m.empty())
      throw std::runtime_error(files.graph_indicator + ": graph " + std::to_string(gi + 1) +
                               " has no nodes");
    g.node_count = m.size();
    g.adjacency = Matrix(m.size(), m.size());
    g.features = Matrix(m.size(), feat_dim);
    g.graph_label = glabel_map.at(raw_graph_labels[static_cast<std::size_t>(gi)]);
    if (!raw_node_labels.empty()) {
      g.node_labels.resize(m.size());
      for (std::size_t a = 0; a < m.size(); ++a)
        g.node_labels[a] = raw_node_labels[static_cast<std::size_t>(m[a])];
    }
  }
  for (const RawEdge& e : edges) {
    Graph& g = bundle.graphs[static_cast<std::size_t>(node_graph[static_cast<std::size_t>(e.u)])];
    add_edge(g.adjacency, local_of[static_cast<std::size_t>(e.u)],
             local_of[static_cast<std::size_t>(e.v)]);
  }
  for (Graph& g : bundle.graphs) {
    for (std::size_t a = 0; a < g.node_count; ++a) {
      std::size_t idx;
      if (!g.node_labels.empty()) {
        idx = static_cast<std::size_t>(g.node_labels[a]);
      } else {
        std::size_t deg = 0;
        for (std::size_t b = 0; b < g.node_count; ++b)
          if (g.adjacency(a, b) != 0.0) ++deg;
        idx = std::min<std::size_t>(deg, feat_dim - 1);
      }
      g.features(a, idx) = 1.0;
    }
  }
  bundle.validate();
  return bundle;
}

void write_tu(const DatasetBundle& bundle, const std::string& dir, const std::string& name) {
  if (bundle.task != Task::kGraph)
    throw std::invalid_argument("write_tu: only graph-classification bundles use the TU layout");
  std::filesystem::create_directories(dir);
  auto path = [&](const std::string& suffix) {
    return (std::filesystem::path(dir) / (name + suffix)).string();
  };

  std::ostringstream a, indicator, glabels, nlabels;
  bool have_node_labels = true;
  for (const Graph& g : bundle.graphs)
    if (g.node_labels.empty()) have_node_labels = false;

  int next_global = 1;
  for (std::size_t gi = 0; gi < bundle.graphs.size(); ++gi) {
    const Graph& g = bundle.graphs[gi];
    const int base = next_global;
    for (std::size_t v = 0; v < g.node_count; ++v) {
      indicator << (gi + 1) << "\n";
      if (have_node_labels) nlabels << g.node_labels[v] << "\n";
    }
    for (std::size_t i = 0; i < g.node_count; ++i)
      for (std::size_t j = 0; j < g.node_count; ++j)
        if (g.adjacency(i, j) != 0.0)
          a << (base + static_cast<int>(i)) << ", " << (base + static_cast<int>(j)) << "\n";
    glabels << *g.graph_label << "\n";
    next_global += static_cast<int>(g.node_count);
  }

  write_file(path("_A.txt"), a.str());
  write_file(path("_graph_indicator.txt"), indicator.str());
  write_file(path("_graph_labels.txt"), glabels.str());
  if (have_node_labels) write_file(path("_node_labels.txt"), nlabels.str());
}

DatasetBundle split_dataset(DatasetBundle bundle, std::uint64_t seed) {
  const std::size_t n = bundle.instance_count();
  if (n < 10) throw std::invalid_argument("split_dataset: need at least 10 instances");
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = (n * 8) / 10;
  const std::size_t n_val = n / 10;
  bundle.split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  bundle.split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  bundle.split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                           order.end());
  return bundle;
}

std::string bundle_to_json(const DatasetBundle& bundle) {
  if (bundle.task != Task::kNode)
    throw std::invalid_argument("bundle_to_json: graph-task bundles are stored as TU files");
  const Graph& g = bundle.single();
  nlohmann::json j;
  j["task"] = "node";
  j["name"] = bundle.name;
  j["class_count"] = bundle.class_count;
  j["nodes"] = g.node_count;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.undirected_edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  j["labels"] = g.node_labels;
  nlohmann::json feats = nlohmann::json::array();
  for (std::size_t i = 0; i < g.node_count; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < g.features.cols; ++c) row.push_back(g.features(i, c));
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  if (!bundle.split.empty()) {
    j["split"]["train"] = bundle.split.train;
    j["split"]["validation"] = bundle.split.validation;
    j["split"]["test"] = bundle.split.test;
  }
  return j.dump(2) + "\n";
}

DatasetBundle bundle_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("task").get<std::string>() != "node")
    throw std::runtime_error("bundle_from_json: unsupported task");
  DatasetBundle bundle;
  bundle.name = j.at("name").get<std::string>();
  bundle.task = Task::kNode;
  bundle.class_count = j.at("class_count").get<int>();
  Graph g;
  g.node_count = j.at("nodes").get<std::size_t>();
  g.adjacency = Matrix(g.node_count, g.node_count);
  for (const auto& e : j.at("edges"))
    add_edge(g.adjacency, e.at(0).get<int>(), e.at(1).get<int>());
  g.node_labels = j.at("labels").get<std::vector<int>>();
  const auto& feats = j.at("features");
  const std::size_t fdim = feats.empty() ? 0 : feats.at(0).size();
  g.features = Matrix(g.node_count, fdim);
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t c = 0; c < fdim; ++c) g.features(i, c) = feats.at(i).at(c).get<double>();
  bundle.graphs.push_back(std::move(g));
  if (j.contains("split")) {
    bundle.split.train = j["split"].at("train").get<std::vector<int>>();
    bundle.split.validation = j["split"].at("validation").get<std::vector<int>>();
    bundle.split.test = j["split"].at("test").get<std::vector<int>>();
  }
  bundle.validate();
  return bundle;
}

DatasetBundle subsample_graphs(DatasetBundle bundle, int max_graphs, std::uint64_t seed) {
  if (bundle.task != Task::kGraph)
    throw std::invalid_argument("subsample_graphs: graph-task bundles only");
  if (max_graphs <= 0 || static_cast<std::size_t>(max_graphs) >= bundle.graphs.size())
    return bundle;
  std::vector<int> order(bundle.graphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(static_cast<std::size_t>(max_graphs));
  std::sort(order.begin(), order.end());
  std::vector<Graph> kept;
  kept.reserve(order.size());
  for (int i : order) kept.push_back(std::move(bundle.graphs[static_cast<std::size_t>(i)]));
  bundle.graphs = std::move(kept);
  bundle.split = Split{};
  return bundle;
}

InstanceView make_instance_view(const DatasetBundle& bundle, int instance, int hops) {
  InstanceView view;
  view.instance_id = instance;
  if (bundle.task == Task::kNode) {
    KhopResult k = khop_subgraph(bundle.single(), instance, hops);
    view.graph = std::move(k.subgraph);
    view.target_local = k.center_local;
    view.to_global = std::move(k.to_global);
  } else {
    if (instance < 0 || static_cast<std::size_t>(instance) >= bundle.graphs.size())
      throw std::invalid_argument("make_instance_view: graph index out of range");
    view.graph = bundle.graphs[static_cast<std::size_t>(instance)];
    view.to_global.resize(view.graph.node_count);
    for (std::size_t i = 0; i < view.graph.node_count; ++i)
      view.to_global[i] = static_cast<int>(i);
  }
  return view;
}

std::vector<int> explanation_instances(const DatasetBundle& bundle,
                                       const std::vector<int>& split_part) {
  std::vector<int> out;
  if (bundle.task == Task::kGraph) {
    out = split_part;
  } else {
    const Graph& g = bundle.single();
    for (int i : split_part)
      if (g.node_labels[static_cast<std::size_t>(i)] >= 1) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ganx
