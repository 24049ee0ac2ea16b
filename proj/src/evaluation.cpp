#include "ganx/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ganx {

double AccuracyReport::recompute() const {
  if (records.empty()) return 0.0;
  int matches = 0;
  for (const auto& r : records)
    if (r.match) ++matches;
  return static_cast<double>(matches) / static_cast<double>(records.size());
}

std::vector<AccuracyReport> sweep(const TargetModel& model, const Generator& gen,
                                  const DatasetBundle& bundle, const std::vector<int>& ks,
                                  int hops) {
  if (bundle.split.test.empty()) throw std::invalid_argument("sweep: empty test split");
  const std::vector<int> instances = explanation_instances(bundle, bundle.split.test);
  if (instances.empty()) throw std::invalid_argument("sweep: no explainable test instances");

  std::vector<AccuracyReport> reports(ks.size());
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    reports[ki].dataset = bundle.name;
    reports[ki].k = ks[ki];
    reports[ki].n_test = static_cast<int>(instances.size());
  }

  for (int id : instances) {
    const InstanceView view = make_instance_view(bundle, id, hops);
    const std::optional<int> target =
        view.target_local >= 0 ? std::optional<int>(view.target_local) : std::nullopt;
    const int original = predict(model, view.graph, nullptr, target);
    const WeightMatrix w = generate(gen, view.graph, original);
    Explanation weighted = apply_mask(view.graph, w);
    weighted.target = target;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const Explanation topk = topk_edges(weighted, ks[ki]);
      const WeightMatrix mask = make_weight_matrix(topk.binary(), view.graph);
      const int masked_pred = predict(model, view.graph, &mask, target);
      InstanceRecord rec;
      rec.id = id;
      rec.original_prediction = original;
      rec.explanation_prediction = masked_pred;
      rec.match = masked_pred == original;
      reports[ki].records.push_back(rec);
    }
  }

  for (auto& r : reports) r.accuracy = r.recompute();
  return reports;
}

AccuracyReport explanation_accuracy(const TargetModel& model, const Generator& gen,
                                    const DatasetBundle& bundle, int k, int hops) {
  return sweep(model, gen, bundle, {k}, hops)[0];
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string reports_to_csv(const std::vector<AccuracyReport>& reports) {
  std::ostringstream out;
  out << "dataset,K,accuracy,n_test\n";
  for (const auto& r : reports)
    out << r.dataset << "," << r.k << "," << format_double(r.accuracy) << "," << r.n_test
        << "\n";
  return out.str();
}

std::vector<CsvRow> csv_rows_from_string(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "dataset,K,accuracy,n_test")
    throw std::runtime_error("csv: bad header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    CsvRow row;
    std::string field;
    if (!std::getline(ls, row.dataset, ',')) throw std::runtime_error("csv: bad row: " + line);
    if (!std::getline(ls, field, ',')) throw std::runtime_error("csv: bad row: " + line);
    row.k = std::stoi(field);
    if (!std::getline(ls, field, ',')) throw std::runtime_error("csv: bad row: " + line);
    row.accuracy = std::stod(field);
    if (!std::getline(ls, field)) throw std::runtime_error("csv: bad row: " + line);
    row.n_test = std::stoi(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string records_to_json(const AccuracyReport& report) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["k"] = report.k;
  j["accuracy"] = report.accuracy;
  j["n_test"] = report.n_test;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json rj;
    rj["id"] = r.id;
    rj["original_prediction"] = r.original_prediction;
    rj["explanation_prediction"] = r.explanation_prediction;
    rj["match"] = r.match;
    records.push_back(std::move(rj));
  }
  j["records"] = std::move(records);
  return j.dump(2) + "\n";
}

AccuracyReport records_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  AccuracyReport report;
  report.dataset = j.at("dataset").get<std::string>();
  report.k = j.at("k").get<int>();
  report.accuracy = j.at("accuracy").get<double>();
  report.n_test = j.at("n_test").get<int>();
  for (const auto& rj : j.at("records")) {
    InstanceRecord r;
    r.id = rj.at("id").get<int>();
    r.original_prediction = rj.at("original_prediction").get<int>();
    r.explanation_prediction = rj.at("explanation_prediction").get<int>();
    r.match = rj.at("match").get<bool>();
    report.records.push_back(r);
  }
  return report;
}

std::string export_dot(const Graph& g, const Explanation& exp,
                       const std::vector<int>& predictions, std::optional<int> target) {
  if (predictions.size() != g.node_count)
    throw std::invalid_argument("export_dot: one prediction per node required");
  static const char* kPalette[] = {"#bdbdbd", "#4e79a7", "#f28e2b", "#59a14f",
                                   "#e15759", "#b07aa1", "#edc948", "#76b7b2"};
  constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

  std::vector<Edge> kept = exp.edge_set;
  std::sort(kept.begin(), kept.end());
  auto is_kept = [&](int i, int j) {
    return std::binary_search(kept.begin(), kept.end(), Edge{std::min(i, j), std::max(i, j)});
  };

  std::ostringstream out;
  out << "graph explanation {\n";
  out << "  node [style=filled fontname=\"Helvetica\"];\n";
  for (std::size_t v = 0; v < g.node_count; ++v) {
    const int cls = predictions[v];
    out << "  n" << v << " [label=\"" << v << "\" fillcolor=\""
        << kPalette[static_cast<std::size_t>(cls) % kPaletteSize] << "\"";
    if (target.has_value() && static_cast<std::size_t>(*target) == v)
      out << " shape=doublecircle color=red penwidth=2";
    out << "];\n";
  }
  for (const auto& [i, j] : g.undirected_edges()) {
    out << "  n" << i << " -- n" << j;
    if (is_kept(i, j))
      out << " [penwidth=3];\n";
    else
      out << " [color=gray penwidth=0.5];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ganx
