#include "ganx/distill.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ganx/util.hpp"

namespace ganx {

namespace {

// -log p[class] of the relevant output row.
double prediction_loss(const TargetModel& model, const Matrix& features, const Matrix& ahat,
                       std::size_t row, int cls) {
  const Matrix probs = forward_probs_raw(model, features, ahat);
  const double p = std::clamp(probs(row, static_cast<std::size_t>(cls)), 1e-300, 1.0);
  return -std::log(p);
}

}  // namespace

DistilledTarget distill(const TargetModel& model, const Graph& g,
                        std::optional<int> target_node, int instance_id) {
  g.validate();
  if (model.kind == ModelKind::kNode && !target_node.has_value())
    throw std::invalid_argument("distill: node-task distillation needs a target node");

  const std::size_t row =
      model.kind == ModelKind::kNode ? static_cast<std::size_t>(*target_node) : 0;
  const Matrix ahat = normalize_weighted(g.adjacency);
  const Matrix probs = forward_probs_raw(model, g.features, ahat);
  const int original_class = argmax_row(probs, row);

  DistilledTarget out;
  out.instance_id = instance_id;
  out.origin_loss = prediction_loss(model, g.features, ahat, row, original_class);
  out.weights = Matrix(g.node_count, g.node_count);

  const auto edges = g.undirected_edges();
  std::vector<double> delta(edges.size());
  double max_positive = 0.0;
  Matrix deleted = g.adjacency;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    deleted(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 0.0;
    deleted(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 0.0;
    const double loss =
        prediction_loss(model, g.features, normalize_weighted(deleted), row, original_class);
    deleted(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    deleted(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
    delta[e] = loss - out.origin_loss;
    max_positive = std::max(max_positive, delta[e]);
  }

  if (max_positive <= 0.0) {
    out.degenerate = true;  // prediction insensitive to every single edge
    return out;
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = std::max(delta[e], 0.0) / max_positive;
    const auto [i, j] = edges[e];
    out.weights(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w;
    out.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = w;
  }
  return out;
}

std::string distilled_to_json(const DistilledTarget& t, const std::string& model_checksum) {
  nlohmann::json j;
  j["instance_id"] = t.instance_id;
  j["model_checksum"] = model_checksum;
  j["nodes"] = t.weights.rows;
  j["origin_loss"] = t.origin_loss;
  j["degenerate"] = t.degenerate;
  nlohmann::json triples = nlohmann::json::array();
  for (std::size_t i = 0; i < t.weights.rows; ++i)
    for (std::size_t k = i + 1; k < t.weights.cols; ++k)
      if (t.weights(i, k) != 0.0) triples.push_back({i, k, t.weights(i, k)});
  j["weights"] = std::move(triples);
  return j.dump(2) + "\n";
}

DistilledTarget distilled_from_json(const std::string& text, std::string* model_checksum_out) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (model_checksum_out != nullptr)
    *model_checksum_out = j.at("model_checksum").get<std::string>();
  DistilledTarget t;
  t.instance_id = j.at("instance_id").get<int>();
  const auto n = j.at("nodes").get<std::size_t>();
  t.weights = Matrix(n, n);
  t.origin_loss = j.at("origin_loss").get<double>();
  t.degenerate = j.at("degenerate").get<bool>();
  for (const auto& triple : j.at("weights")) {
    const auto i = triple.at(0).get<std::size_t>();
    const auto k = triple.at(1).get<std::size_t>();
    const double w = triple.at(2).get<double>();
    t.weights(i, k) = w;
    t.weights(k, i) = w;
  }
  return t;
}

std::vector<DistilledTarget> distill_all(const TargetModel& model, const DatasetBundle& bundle,
                                         const std::string& cache_dir,
                                         const std::string& model_checksum, int hops) {
  if (bundle.split.empty()) throw std::invalid_argument("distill_all: bundle has no split");
  std::vector<int> instances = explanation_instances(bundle, bundle.split.train);
  const std::vector<int> val = explanation_instances(bundle, bundle.split.validation);
  instances.insert(instances.end(), val.begin(), val.end());
  std::sort(instances.begin(), instances.end());

  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);

  std::vector<DistilledTarget> out;
  out.reserve(instances.size());
  for (int id : instances) {
    const std::string cache_path =
        cache_dir.empty()
            ? std::string()
            : (std::filesystem::path(cache_dir) / ("inst_" + std::to_string(id) + ".json"))
                  .string();
    if (!cache_path.empty() && file_exists(cache_path)) {
      std::string checksum;
      DistilledTarget cached = distilled_from_json(read_file(cache_path), &checksum);
      if (checksum == model_checksum && cached.instance_id == id) {
        out.push_back(std::move(cached));
        continue;
      }
    }
    const InstanceView view = make_instance_view(bundle, id, hops);
    DistilledTarget t =
        distill(model, view.graph,
                view.target_local >= 0 ? std::optional<int>(view.target_local) : std::nullopt, id);
    if (!cache_path.empty()) write_file(cache_path, distilled_to_json(t, model_checksum));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace ganx
