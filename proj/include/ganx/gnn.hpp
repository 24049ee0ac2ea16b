#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ganx/datasets.hpp"
#include "ganx/graph.hpp"
#include "ganx/tape.hpp"

namespace ganx {

// One graph convolution: H' = act(Ahat * H * weight + bias).
struct GcnLayer {
  diff::TensorPtr weight;  // f_in x f_out
  diff::TensorPtr bias;    // 1 x f_out
};

enum class ModelKind { kNode, kGraph };

// The explained model f: a 3-layer GCN node classifier, or a 3-layer GCN +
// row-mean pooling + dense graph classifier. Once trained it stays frozen;
// every explanation is checked against its predictions.
struct TargetModel {
  ModelKind kind = ModelKind::kNode;
  int class_count = 0;
  std::vector<GcnLayer> layers;
  GcnLayer readout;  // graph kind only

  std::size_t feature_dim() const;
  std::vector<diff::TensorPtr> parameters() const;
};

struct TrainConfig {
  int epochs = 1000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  int patience = 100;  // early stop on validation accuracy

  static TrainConfig defaults_for(Task task);
};

TargetModel make_target_model(ModelKind kind, std::size_t feature_dim, int class_count,
                              std::uint64_t seed, int hidden = 20, bool trainable = true);

// Pre-softmax logits, recorded on the tape: node kind -> n x C, graph
// kind -> 1 x C. `ahat` is the (possibly differentiable, possibly masked)
// normalized adjacency.
diff::TensorPtr model_logits(diff::Tape& tape, const TargetModel& m,
                             const diff::TensorPtr& features, const diff::TensorPtr& ahat);

// Plain forward pass -> row-stochastic class probabilities. With a mask, the
// weighted adjacency W (.) A is renormalized before message passing, so
// edge weights scale messages.
Matrix forward_probs(const TargetModel& m, const Graph& g, const WeightMatrix* mask = nullptr);
Matrix forward_probs_raw(const TargetModel& m, const Matrix& features, const Matrix& ahat);

// Row-wise softmax with max-shift; shared by the plain and taped paths.
Matrix softmax_rows(const Matrix& logits);

// Argmax with ties broken toward the lower class id.
int argmax_row(const Matrix& probs, std::size_t row);

int predict(const TargetModel& m, const Graph& g, const WeightMatrix* mask = nullptr,
            std::optional<int> target_node = std::nullopt);

// Trains on the bundle's train split (softmax cross-entropy) and returns the
// frozen model with the best validation accuracy. Divergence (non-finite
// loss) aborts with a diagnostic.
TargetModel train_target(const DatasetBundle& bundle, const TrainConfig& cfg);

// Fraction of `instances` (node ids or graph ids) whose prediction matches
// the dataset label.
double dataset_accuracy(const TargetModel& m, const DatasetBundle& bundle,
                        const std::vector<int>& instances);

// Checkpoint round-trips are bit-exact.
std::string model_to_json(const TargetModel& m);
TargetModel model_from_json(const std::string& text, bool trainable = false);

}  // namespace ganx
