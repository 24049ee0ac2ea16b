#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ganx/datasets.hpp"
#include "ganx/gnn.hpp"
#include "ganx/graph.hpp"

namespace ganx {

// Ground-truth edge weights for one instance, produced by measuring how much
// deleting each edge increases the model's loss against its own original
// prediction. Scores are clamped at zero and normalized so the most
// influential edge gets weight 1.
struct DistilledTarget {
  int instance_id = -1;
  Matrix weights;            // same shape as the instance adjacency
  double origin_loss = 0.0;  // model loss on the unmodified instance
  bool degenerate = false;   // no edge deletion increased the loss
};

// For node tasks, g must already be the explained node's computation
// subgraph and target_node its local index.
DistilledTarget distill(const TargetModel& model, const Graph& g,
                        std::optional<int> target_node, int instance_id = -1);

// Distills every train and validation instance, caching each result under
// cache_dir keyed by the model checksum. A checksum mismatch triggers a
// recompute; hits are served bitwise-identical from disk.
std::vector<DistilledTarget> distill_all(const TargetModel& model, const DatasetBundle& bundle,
                                         const std::string& cache_dir,
                                         const std::string& model_checksum, int hops);

std::string distilled_to_json(const DistilledTarget& t, const std::string& model_checksum);
DistilledTarget distilled_from_json(const std::string& text, std::string* model_checksum_out);

}  // namespace ganx
