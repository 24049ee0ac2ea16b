#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ganx/datasets.hpp"
#include "ganx/distill.hpp"
#include "ganx/gnn.hpp"
#include "ganx/graph.hpp"
#include "ganx/tape.hpp"

namespace ganx {

// Encoder-decoder generator. The encoder is a graph-conv stack producing node
// embeddings; the decoder is a 2-layer dense net scoring each existing edge
// from the elementwise product of its endpoint embeddings. Scores pass
// through a sigmoid, so the emitted weight matrix is symmetric, supported on
// the input edges only, and valued in (0, 1) by construction.
struct Generator {
  std::vector<GcnLayer> encoder;
  diff::TensorPtr dec_w1, dec_b1, dec_w2, dec_b2;
  int class_count = 0;  // width of the prediction one-hot appended to features

  std::size_t graph_feature_dim() const;  // expected width before the one-hot
  std::vector<diff::TensorPtr> parameters() const;
};

// Three graph-conv layers + row-mean pooling + dense scalar head. Sees either
// a binary ("real") or a generated weighted adjacency.
struct Discriminator {
  std::vector<GcnLayer> convs;
  diff::TensorPtr out_weight, out_bias;

  std::vector<diff::TensorPtr> parameters() const;
};

struct ExplainerConfig {
  double lambda = 2.0;  // fidelity weight: 2 synthetic, 3 real-world
  int epochs = 300;
  double gen_lr = 1e-3;
  double disc_lr = 1e-3;
  std::uint64_t seed = 0;
  int encoder_depth = 6;  // 6 synthetic, 7 real-world
  int disc_steps = 1;     // discriminator steps per generator step
  int hidden = 20;
  int hops = 3;  // computation-subgraph radius = target GNN depth
  double aux_weight = 1.0;  // supervision toward distilled ground truth
  int eval_every = 5;
  int patience = 30;  // epochs without validation improvement before stopping
  std::vector<int> validation_ks;  // Ks averaged for best-epoch selection

  static ExplainerConfig defaults_for(const std::string& dataset_name);
};

Generator make_generator(std::size_t graph_feature_dim, int class_count, int depth, int hidden,
                         std::uint64_t seed);
Discriminator make_discriminator(std::size_t feature_dim, int hidden, std::uint64_t seed);

// Tape-level generator pass: per-edge scores (E x 1, sigmoid outputs in edge
// list order) and the scattered symmetric weight matrix.
struct GeneratorForward {
  diff::TensorPtr scores;
  diff::TensorPtr w;
  std::vector<Edge> edges;
};
GeneratorForward generator_forward(diff::Tape& tape, const Generator& gen, const Graph& g,
                                   int predicted_class);

// Differentiable renormalization of the masked adjacency W (.) A; matches
// normalize_weighted bit for bit when W is constant.
diff::TensorPtr renormalized_masked(diff::Tape& tape, const diff::TensorPtr& w,
                                    const diff::TensorPtr& adjacency,
                                    const diff::TensorPtr& identity);

WeightMatrix generate(const Generator& gen, const Graph& g, int predicted_class);

diff::TensorPtr discriminator_logit(diff::Tape& tape, const Discriminator& disc,
                                    const diff::TensorPtr& ahat,
                                    const diff::TensorPtr& features);

// Probability that the (optionally weighted) graph is real; strictly inside
// (0, 1).
double discriminate(const Discriminator& disc, const Graph& g,
                    const WeightMatrix* weights = nullptr);

// -mean(log d_real) - mean(log(1 - d_fake)) over the minibatch, clamped logs.
double discriminator_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake);

// Mean squared difference between the model's outputs on the original and
// masked graph: mean over nodes of the per-row squared distance for node
// tasks, mean over the class dimension for graph tasks.
double fidelity_term(const Matrix& f_orig, const Matrix& f_masked, Task task);

// mean(log(1 - d_fake)) + lambda * fidelity. lambda must be positive.
double generator_loss(const std::vector<double>& d_fake, const Matrix& f_orig,
                      const Matrix& f_masked, double lambda, Task task);

struct TrainedExplainer {
  Generator generator;
  Discriminator discriminator;
  double best_validation_accuracy = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
};

// Alternating adversarial training over the train split, supervised by the
// distilled targets; returns the generator snapshot with the best validation
// explanation accuracy (averaged over cfg.validation_ks). Deterministic for
// a fixed seed. Missing distilled targets abort with the offending ids.
TrainedExplainer train_explainer(const DatasetBundle& bundle, const TargetModel& model,
                                 const std::vector<DistilledTarget>& targets,
                                 const ExplainerConfig& cfg);

struct ExplainResult {
  InstanceView view;
  Explanation explanation;  // binary top-K form, local node ids
  std::vector<Edge> global_edges;
  int predicted_class = -1;
};

// generate -> apply_mask -> topk_edges on the instance's computation
// subgraph; edge ids are mapped back to dataset node ids in global_edges.
ExplainResult explain(const Generator& gen, const TargetModel& model,
                      const DatasetBundle& bundle, int instance, int k, int hops = 3);

// Mean explanation accuracy over the given instances at one K (no records;
// the evaluation module produces full reports).
double explanation_accuracy_over(const Generator& gen, const TargetModel& model,
                                 const DatasetBundle& bundle, const std::vector<int>& instances,
                                 int k, int hops = 3);

// Checkpoints carry the config, dataset name, and target-model checksum.
std::string explainer_to_json(const TrainedExplainer& trained, const ExplainerConfig& cfg,
                              const std::string& dataset, const std::string& model_checksum);
TrainedExplainer explainer_from_json(const std::string& text, ExplainerConfig* cfg_out = nullptr,
                                     std::string* dataset_out = nullptr,
                                     std::string* model_checksum_out = nullptr);

}  // namespace ganx
