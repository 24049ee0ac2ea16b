#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ganx/datasets.hpp"
#include "ganx/explainer.hpp"
#include "ganx/gnn.hpp"

namespace ganx {

// A stage failed, or an upstream artifact it needs is missing. `stage` names
// the stage that must run (or be fixed) first.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Every experiment knob in one document. The master seed drives dataset
// generation, the split, and both trainings.
struct RunConfig {
  std::string dataset = "tree-cycles";  // "ba-shapes" | "tree-cycles" | "tu"
  std::string tu_dir;                   // dataset == "tu" only
  std::string tu_name;
  std::uint64_t seed = 0;
  int subsample = 0;  // cap on graph count for graph tasks; 0 keeps all
  TrainConfig train;
  ExplainerConfig explainer;
  std::vector<int> k_list;
  int viz_count = 6;
  int viz_k = 0;  // 0 -> middle entry of k_list

  static RunConfig defaults_for(const std::string& dataset);
  // Parses a config document; values overlay the per-dataset defaults.
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

const std::vector<std::string>& stage_names();  // in pipeline order

// Runs stages against a run directory, caching by content: a stage is
// skipped when its inputs (config slice + upstream artifacts) and recorded
// outputs are unchanged. manifest.json records the resolved config, its
// hash, and per-stage keys and output checksums.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::string out_dir);

  // stage is one of stage_names(), or "pipeline" for all in order.
  void run(const std::string& stage);

  bool stage_cached(const std::string& stage) const;
  std::string artifact_path(const std::string& name) const;
  const RunConfig& config() const { return cfg_; }

  // Loaded-artifact helpers (throw StageError naming the producing stage
  // when the artifact is missing).
  DatasetBundle load_dataset() const;
  TargetModel load_model() const;
  TrainedExplainer load_explainer() const;
  std::string model_checksum() const;

 private:
  void run_gen_data();
  void run_train_gnn();
  void run_distill();
  void run_train_explainer();
  void run_evaluate();
  void run_visualize();

  std::string stage_key(const std::string& stage) const;
  void record_stage(const std::string& stage, const std::vector<std::string>& outputs);
  std::string upstream_checksum(const std::string& stage, const std::string& artifact) const;
  std::string dataset_artifact_name() const;

  RunConfig cfg_;
  std::string out_dir_;
};

}  // namespace ganx
