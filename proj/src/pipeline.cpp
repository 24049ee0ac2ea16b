#include "ganx/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ganx/distill.hpp"
#include "ganx/evaluation.hpp"
#include "ganx/util.hpp"

namespace ganx {

namespace {

nlohmann::json train_json(const TrainConfig& t) {
  nlohmann::json j;
  j["epochs"] = t.epochs;
  j["lr"] = t.lr;
  j["weight_decay"] = t.weight_decay;
  j["patience"] = t.patience;
  return j;
}

void train_from(const nlohmann::json& j, TrainConfig& t) {
  if (j.contains("epochs")) t.epochs = j["epochs"].get<int>();
  if (j.contains("lr")) t.lr = j["lr"].get<double>();
  if (j.contains("weight_decay")) t.weight_decay = j["weight_decay"].get<double>();
  if (j.contains("patience")) t.patience = j["patience"].get<int>();
}

nlohmann::json explainer_json(const ExplainerConfig& e) {
  nlohmann::json j;
  j["lambda"] = e.lambda;
  j["epochs"] = e.epochs;
  j["gen_lr"] = e.gen_lr;
  j["disc_lr"] = e.disc_lr;
  j["encoder_depth"] = e.encoder_depth;
  j["disc_steps"] = e.disc_steps;
  j["hidden"] = e.hidden;
  j["hops"] = e.hops;
  j["aux_weight"] = e.aux_weight;
  j["eval_every"] = e.eval_every;
  j["patience"] = e.patience;
  j["validation_ks"] = e.validation_ks;
  return j;
}

void explainer_from(const nlohmann::json& j, ExplainerConfig& e) {
  if (j.contains("lambda")) e.lambda = j["lambda"].get<double>();
  if (j.contains("epochs")) e.epochs = j["epochs"].get<int>();
  if (j.contains("gen_lr")) e.gen_lr = j["gen_lr"].get<double>();
  if (j.contains("disc_lr")) e.disc_lr = j["disc_lr"].get<double>();
  if (j.contains("encoder_depth")) e.encoder_depth = j["encoder_depth"].get<int>();
  if (j.contains("disc_steps")) e.disc_steps = j["disc_steps"].get<int>();
  if (j.contains("hidden")) e.hidden = j["hidden"].get<int>();
  if (j.contains("hops")) e.hops = j["hops"].get<int>();
  if (j.contains("aux_weight")) e.aux_weight = j["aux_weight"].get<double>();
  if (j.contains("eval_every")) e.eval_every = j["eval_every"].get<int>();
  if (j.contains("patience")) e.patience = j["patience"].get<int>();
  if (j.contains("validation_ks"))
    e.validation_ks = j["validation_ks"].get<std::vector<int>>();
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["dataset"] = c.dataset;
  if (c.dataset == "tu") {
    j["tu_dir"] = c.tu_dir;
    j["tu_name"] = c.tu_name;
  }
  j["seed"] = c.seed;
  j["subsample"] = c.subsample;
  j["k_list"] = c.k_list;
  j["train"] = train_json(c.train);
  j["explainer"] = explainer_json(c.explainer);
  j["viz_count"] = c.viz_count;
  j["viz_k"] = c.viz_k;
  return j;
}

}  // namespace

RunConfig RunConfig::defaults_for(const std::string& dataset) {
  RunConfig cfg;
  cfg.dataset = dataset;
  if (dataset == "ba-shapes") {
    cfg.k_list = {5, 6, 7, 8, 9};
    cfg.train = TrainConfig::defaults_for(Task::kNode);
  } else if (dataset == "tree-cycles") {
    cfg.k_list = {6, 7, 8, 9, 10};
    cfg.train = TrainConfig::defaults_for(Task::kNode);
  } else if (dataset == "tu") {
    cfg.k_list = {15, 20, 25, 30};
    cfg.train = TrainConfig::defaults_for(Task::kGraph);
  } else {
    throw std::invalid_argument("unknown dataset '" + dataset +
                                "' (expected ba-shapes, tree-cycles, or tu)");
  }
  cfg.explainer = ExplainerConfig::defaults_for(dataset == "tu" ? "tu" : dataset);
  return cfg;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  const std::string dataset = j.value("dataset", std::string("tree-cycles"));
  RunConfig cfg = defaults_for(dataset);
  if (j.contains("tu_dir")) cfg.tu_dir = j["tu_dir"].get<std::string>();
  if (j.contains("tu_name")) cfg.tu_name = j["tu_name"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("subsample")) cfg.subsample = j["subsample"].get<int>();
  if (j.contains("k_list")) cfg.k_list = j["k_list"].get<std::vector<int>>();
  if (j.contains("train")) train_from(j["train"], cfg.train);
  if (j.contains("explainer")) explainer_from(j["explainer"], cfg.explainer);
  if (j.contains("viz_count")) cfg.viz_count = j["viz_count"].get<int>();
  if (j.contains("viz_k")) cfg.viz_k = j["viz_k"].get<int>();
  return cfg;
}

std::string RunConfig::to_json_text() const { return config_to_json(*this).dump(2) + "\n"; }

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kStages = {
      "gen-data", "train-gnn", "distill", "train-explainer", "evaluate", "visualize"};
  return kStages;
}

Pipeline::Pipeline(RunConfig cfg, std::string out_dir)
    : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {
  if (cfg_.k_list.empty()) throw std::invalid_argument("RunConfig: k_list must not be empty");
  // The master seed drives every stage.
  cfg_.train.seed = cfg_.seed;
  cfg_.explainer.seed = cfg_.seed;
  std::filesystem::create_directories(out_dir_);
}

std::string Pipeline::artifact_path(const std::string& name) const {
  return (std::filesystem::path(out_dir_) / name).string();
}

namespace {

nlohmann::json load_manifest(const std::string& path) {
  if (!file_exists(path)) return nlohmann::json::object();
  return nlohmann::json::parse(read_file(path));
}

}  // namespace

std::string Pipeline::upstream_checksum(const std::string& stage,
                                        const std::string& artifact) const {
  const std::string path = artifact_path(artifact);
  if (!file_exists(path))
    throw StageError(stage, "missing artifact '" + artifact + "'; run stage '" + stage +
                                "' first");
  return hex64(fnv1a64(read_file(path)));
}

std::string Pipeline::stage_key(const std::string& stage) const {
  nlohmann::json slice;
  if (stage == "gen-data") {
    slice["dataset"] = cfg_.dataset;
    slice["seed"] = cfg_.seed;
    slice["subsample"] = cfg_.subsample;
    if (cfg_.dataset == "tu") {
      slice["tu_dir"] = cfg_.tu_dir;
      slice["tu_name"] = cfg_.tu_name;
    }
  } else if (stage == "train-gnn") {
    slice["train"] = train_json(cfg_.train);
    slice["seed"] = cfg_.seed;
    slice["dataset_artifact"] = upstream_checksum("gen-data", dataset_artifact_name());
  } else if (stage == "distill") {
    slice["hops"] = cfg_.explainer.hops;
    slice["model"] = upstream_checksum("train-gnn", "model.json");
    slice["dataset_artifact"] = upstream_checksum("gen-data", dataset_artifact_name());
  } else if (stage == "train-explainer") {
    slice["explainer"] = explainer_json(cfg_.explainer);
    slice["seed"] = cfg_.seed;
    slice["model"] = upstream_checksum("train-gnn", "model.json");
    slice["distill_index"] = upstream_checksum("distill", "distill.json");
    slice["dataset_artifact"] = upstream_checksum("gen-data", dataset_artifact_name());
  } else if (stage == "evaluate") {
    slice["k_list"] = cfg_.k_list;
    slice["explainer_artifact"] = upstream_checksum("train-explainer", "explainer.json");
    slice["model"] = upstream_checksum("train-gnn", "model.json");
    slice["dataset_artifact"] = upstream_checksum("gen-data", dataset_artifact_name());
  } else if (stage == "visualize") {
    slice["viz_count"] = cfg_.viz_count;
    slice["viz_k"] = cfg_.viz_k;
    slice["k_list"] = cfg_.k_list;
    slice["explainer_artifact"] = upstream_checksum("train-explainer", "explainer.json");
    slice["model"] = upstream_checksum("train-gnn", "model.json");
    slice["dataset_artifact"] = upstream_checksum("gen-data", dataset_artifact_name());
  } else {
    throw std::invalid_argument("unknown stage: " + stage);
  }
  return hex64(fnv1a64(slice.dump()));
}

bool Pipeline::stage_cached(const std::string& stage) const {
  const nlohmann::json manifest = load_manifest(artifact_path("manifest.json"));
  if (!manifest.contains("stages") || !manifest["stages"].contains(stage)) return false;
  const auto& entry = manifest["stages"][stage];
  std::string key;
  try {
    key = stage_key(stage);
  } catch (const StageError&) {
    return false;  // upstream artifact missing
  }
  if (entry.value("key", std::string()) != key) return false;
  for (const auto& [name, checksum] : entry.at("outputs").items()) {
    const std::string path = artifact_path(name);
    if (!file_exists(path)) return false;
    if (hex64(fnv1a64(read_file(path))) != checksum.get<std::string>()) return false;
  }
  return true;
}

void Pipeline::record_stage(const std::string& stage, const std::vector<std::string>& outputs) {
  const std::string manifest_path = artifact_path("manifest.json");
  nlohmann::json manifest = load_manifest(manifest_path);
  const nlohmann::json cfg_json = config_to_json(cfg_);
  manifest["config"] = cfg_json;
  manifest["config_hash"] = hex64(fnv1a64(cfg_json.dump()));
  nlohmann::json entry;
  entry["key"] = stage_key(stage);
  nlohmann::json outs = nlohmann::json::object();
  for (const std::string& name : outputs)
    outs[name] = hex64(fnv1a64(read_file(artifact_path(name))));
  entry["outputs"] = std::move(outs);
  manifest["stages"][stage] = std::move(entry);
  write_file(manifest_path, manifest.dump(2) + "\n");
}

std::string Pipeline::dataset_artifact_name() const {
  return cfg_.dataset == "tu" ? "data/" + cfg_.tu_name + "_A.txt" : "dataset.json";
}

DatasetBundle Pipeline::load_dataset() const {
  if (cfg_.dataset == "tu") {
    const std::string dir = artifact_path("data");
    const TuRawFiles files = TuRawFiles::locate(dir, cfg_.tu_name);
    if (!file_exists(files.a))
      throw StageError("gen-data", "missing artifact 'data/" + cfg_.tu_name +
                                       "_A.txt'; run stage 'gen-data' first");
    DatasetBundle bundle = load_tu(files, cfg_.tu_name);
    return split_dataset(std::move(bundle), cfg_.seed);
  }
  const std::string path = artifact_path("dataset.json");
  if (!file_exists(path))
    throw StageError("gen-data", "missing artifact 'dataset.json'; run stage 'gen-data' first");
  return bundle_from_json(read_file(path));
}

TargetModel Pipeline::load_model() const {
  const std::string path = artifact_path("model.json");
  if (!file_exists(path))
    throw StageError("train-gnn", "missing artifact 'model.json'; run stage 'train-gnn' first");
  return model_from_json(read_file(path));
}

TrainedExplainer Pipeline::load_explainer() const {
  const std::string path = artifact_path("explainer.json");
  if (!file_exists(path))
    throw StageError("train-explainer",
                     "missing artifact 'explainer.json'; run stage 'train-explainer' first");
  return explainer_from_json(read_file(path));
}

std::string Pipeline::model_checksum() const {
  return upstream_checksum("train-gnn", "model.json");
}

void Pipeline::run_gen_data() {
  if (cfg_.dataset == "tu") {
    if (cfg_.tu_dir.empty() || cfg_.tu_name.empty())
      throw StageError("gen-data", "dataset 'tu' needs tu_dir and tu_name");
    const TuRawFiles files = TuRawFiles::locate(cfg_.tu_dir, cfg_.tu_name);
    if (!file_exists(files.a))
      throw StageError("gen-data", "TU file not found: " + files.a);
    DatasetBundle bundle = load_tu(files, cfg_.tu_name);
    bundle = subsample_graphs(std::move(bundle), cfg_.subsample, cfg_.seed);
    write_tu(bundle, artifact_path("data"), cfg_.tu_name);
    record_stage("gen-data", {dataset_artifact_name(),
                              "data/" + cfg_.tu_name + "_graph_indicator.txt",
                              "data/" + cfg_.tu_name + "_graph_labels.txt"});
    return;
  }
  DatasetBundle bundle =
      cfg_.dataset == "ba-shapes" ? gen_ba_shapes(cfg_.seed) : gen_tree_cycles(cfg_.seed);
  bundle = split_dataset(std::move(bundle), cfg_.seed);
  write_file(artifact_path("dataset.json"), bundle_to_json(bundle));
  record_stage("gen-data", {"dataset.json"});
}

void Pipeline::run_train_gnn() {
  const DatasetBundle bundle = load_dataset();
  const TargetModel model = train_target(bundle, cfg_.train);
  write_file(artifact_path("model.json"), model_to_json(model));
  record_stage("train-gnn", {"model.json"});
}

void Pipeline::run_distill() {
  const DatasetBundle bundle = load_dataset();
  const TargetModel model = load_model();
  const std::string checksum = model_checksum();
  const auto targets =
      distill_all(model, bundle, artifact_path("distill"), checksum, cfg_.explainer.hops);
  // Index file: instance ids + checksums of the per-instance cache files.
  nlohmann::json index;
  index["model_checksum"] = checksum;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& t : targets) {
    const std::string name = "distill/inst_" + std::to_string(t.instance_id) + ".json";
    files[name] = hex64(fnv1a64(read_file(artifact_path(name))));
  }
  index["files"] = std::move(files);
  write_file(artifact_path("distill.json"), index.dump(2) + "\n");
  record_stage("distill", {"distill.json"});
}

void Pipeline::run_train_explainer() {
  const DatasetBundle bundle = load_dataset();
  const TargetModel model = load_model();
  const std::string checksum = model_checksum();
  if (!file_exists(artifact_path("distill.json")))
    throw StageError("distill", "missing artifact 'distill.json'; run stage 'distill' first");
  const auto targets =
      distill_all(model, bundle, artifact_path("distill"), checksum, cfg_.explainer.hops);
  const TrainedExplainer trained = train_explainer(bundle, model, targets, cfg_.explainer);
  write_file(artifact_path("explainer.json"),
             explainer_to_json(trained, cfg_.explainer, bundle.name, checksum));
  record_stage("train-explainer", {"explainer.json"});
}

void Pipeline::run_evaluate() {
  const DatasetBundle bundle = load_dataset();
  const TargetModel model = load_model();
  const TrainedExplainer trained = load_explainer();
  const auto reports =
      sweep(model, trained.generator, bundle, cfg_.k_list, cfg_.explainer.hops);
  std::vector<std::string> outputs;
  write_file(artifact_path("report.csv"), reports_to_csv(reports));
  outputs.push_back("report.csv");
  for (const auto& r : reports) {
    const std::string name = "records_K" + std::to_string(r.k) + ".json";
    write_file(artifact_path(name), records_to_json(r));
    outputs.push_back(name);
  }
  record_stage("evaluate", outputs);
}

void Pipeline::run_visualize() {
  const DatasetBundle bundle = load_dataset();
  const TargetModel model = load_model();
  const TrainedExplainer trained = load_explainer();
  const int k = cfg_.viz_k > 0 ? cfg_.viz_k : cfg_.k_list[cfg_.k_list.size() / 2];
  std::vector<int> instances = explanation_instances(bundle, bundle.split.test);
  if (static_cast<int>(instances.size()) > cfg_.viz_count)
    instances.resize(static_cast<std::size_t>(cfg_.viz_count));
  std::vector<std::string> outputs;
  for (int id : instances) {
    const ExplainResult res =
        explain(trained.generator, model, bundle, id, k, cfg_.explainer.hops);
    std::vector<int> predictions(res.view.graph.node_count);
    if (bundle.task == Task::kNode) {
      const Matrix probs = forward_probs(model, res.view.graph);
      for (std::size_t v = 0; v < probs.rows; ++v)
        predictions[v] = argmax_row(probs, v);
    } else {
      std::fill(predictions.begin(), predictions.end(), res.predicted_class);
    }
    const std::string name = "dot/" + bundle.name + "_" + std::to_string(id) + "_K" +
                             std::to_string(k) + ".dot";
    write_file(artifact_path(name),
               export_dot(res.view.graph, res.explanation, predictions,
                          res.explanation.target));
    outputs.push_back(name);
  }
  record_stage("visualize", outputs);
}

void Pipeline::run(const std::string& stage) {
  if (stage == "pipeline") {
    for (const std::string& s : stage_names()) {
      if (stage_cached(s)) continue;
      run(s);
    }
    return;
  }
  if (stage == "gen-data")
    run_gen_data();
  else if (stage == "train-gnn")
    run_train_gnn();
  else if (stage == "distill")
    run_distill();
  else if (stage == "train-explainer")
    run_train_explainer();
  else if (stage == "evaluate")
    run_evaluate();
  else if (stage == "visualize")
    run_visualize();
  else
    throw std::invalid_argument("unknown stage: " + stage);
}

}  // namespace ganx
