#include "ganx/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ganx/rng.hpp"

namespace ganx {

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-limit, limit);
  return m;
}

GcnLayer make_layer(std::size_t in, std::size_t out, Rng& rng, bool trainable) {
  return GcnLayer{diff::Tensor::make(glorot(in, out, rng), trainable),
                  diff::Tensor::make(Matrix(1, out), trainable)};
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

}  // namespace

std::size_t TargetModel::feature_dim() const {
  if (layers.empty()) throw std::logic_error("TargetModel: no layers");
  return layers.front().weight->rows();
}

std::vector<diff::TensorPtr> TargetModel::parameters() const {
  std::vector<diff::TensorPtr> p;
  for (const auto& l : layers) {
    p.push_back(l.weight);
    p.push_back(l.bias);
  }
  if (kind == ModelKind::kGraph) {
    p.push_back(readout.weight);
    p.push_back(readout.bias);
  }
  return p;
}

TrainConfig TrainConfig::defaults_for(Task task) {
  TrainConfig cfg;
  if (task == Task::kNode) {
    cfg.epochs = 1000;
    cfg.patience = 100;
  } else {
    cfg.epochs = 100;
    cfg.patience = 20;
  }
  return cfg;
}

TargetModel make_target_model(ModelKind kind, std::size_t feature_dim, int class_count,
                              std::uint64_t seed, int hidden, bool trainable) {
  if (class_count < 2) throw std::invalid_argument("make_target_model: class_count must be >= 2");
  Rng rng(seed);
  const auto h = static_cast<std::size_t>(hidden);
  const auto c = static_cast<std::size_t>(class_count);
  TargetModel m;
  m.kind = kind;
  m.class_count = class_count;
  if (kind == ModelKind::kNode) {
    m.layers.push_back(make_layer(feature_dim, h, rng, trainable));
    m.layers.push_back(make_layer(h, h, rng, trainable));
    m.layers.push_back(make_layer(h, c, rng, trainable));
  } else {
    m.layers.push_back(make_layer(feature_dim, h, rng, trainable));
    m.layers.push_back(make_layer(h, h, rng, trainable));
    m.layers.push_back(make_layer(h, h, rng, trainable));
    m.readout = make_layer(h, c, rng, trainable);
  }
  return m;
}

diff::TensorPtr model_logits(diff::Tape& tape, const TargetModel& m,
                             const diff::TensorPtr& features, const diff::TensorPtr& ahat) {
  if (features->cols() != m.feature_dim())
    throw std::invalid_argument("model_logits: feature width mismatch (" +
                                features->value().shape_str() + " vs weight " +
                                m.layers.front().weight->value().shape_str() + ")");
  diff::TensorPtr h = features;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    h = tape.add_bias(tape.matmul(ahat, tape.matmul(h, m.layers[li].weight)), m.layers[li].bias);
    const bool last_conv = (li + 1 == m.layers.size());
    if (!last_conv || m.kind == ModelKind::kGraph) h = tape.relu(h);
  }
  if (m.kind == ModelKind::kGraph)
    h = tape.add_bias(tape.matmul(tape.mean_rows(h), m.readout.weight), m.readout.bias);
  return h;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (std::size_t i = 0; i < out.rows; ++i) {
    double mx = out(i, 0);
    for (std::size_t j = 1; j < out.cols; ++j) mx = std::max(mx, out(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < out.cols; ++j) {
      out(i, j) = std::exp(out(i, j) - mx);
      sum += out(i, j);
    }
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) /= sum;
  }
  return out;
}

Matrix forward_probs_raw(const TargetModel& m, const Matrix& features, const Matrix& ahat) {
  if (features.cols != m.feature_dim())
    throw std::invalid_argument("forward_probs: feature width mismatch (" +
                                features.shape_str() + " vs weight " +
                                m.layers.front().weight->value().shape_str() + ")");
  Matrix h = features, hw, prop;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    matmul_into(h, m.layers[li].weight->value(), hw);
    matmul_into(ahat, hw, prop);
    const Matrix& bias = m.layers[li].bias->value();
    for (std::size_t i = 0; i < prop.rows; ++i)
      for (std::size_t j = 0; j < prop.cols; ++j) prop(i, j) += bias(0, j);
    const bool last_conv = (li + 1 == m.layers.size());
    if (!last_conv || m.kind == ModelKind::kGraph) relu_inplace(prop);
    h = prop;
  }
  if (m.kind == ModelKind::kGraph) {
    Matrix pooled(1, h.cols);
    for (std::size_t j = 0; j < h.cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < h.rows; ++i) s += h(i, j);
      pooled(0, j) = s / static_cast<double>(h.rows);
    }
    Matrix logits;
    matmul_into(pooled, m.readout.weight->value(), logits);
    for (std::size_t j = 0; j < logits.cols; ++j) logits(0, j) += m.readout.bias->value()(0, j);
    return softmax_rows(logits);
  }
  return softmax_rows(h);
}

Matrix forward_probs(const TargetModel& m, const Graph& g, const WeightMatrix* mask) {
  if (mask == nullptr) return forward_probs_raw(m, g.features, normalize_adjacency(g));
  const Explanation exp = apply_mask(g, *mask);  // enforces the support invariant
  return forward_probs_raw(m, g.features, normalize_weighted(exp.weighted));
}

int argmax_row(const Matrix& probs, std::size_t row) {
  int best = 0;
  for (std::size_t j = 1; j < probs.cols; ++j)
    if (probs(row, j) > probs(row, static_cast<std::size_t>(best))) best = static_cast<int>(j);
  return best;
}

int predict(const TargetModel& m, const Graph& g, const WeightMatrix* mask,
            std::optional<int> target_node) {
  const Matrix probs = forward_probs(m, g, mask);
  std::size_t row = 0;
  if (m.kind == ModelKind::kNode) {
    if (target_node.has_value()) {
      if (*target_node < 0 || static_cast<std::size_t>(*target_node) >= probs.rows)
        throw std::invalid_argument("predict: target node out of range");
      row = static_cast<std::size_t>(*target_node);
    }
  }
  return argmax_row(probs, row);
}

namespace {

std::vector<Matrix> snapshot(const std::vector<diff::TensorPtr>& params) {
  std::vector<Matrix> s;
  s.reserve(params.size());
  for (const auto& p : params) s.push_back(p->value());
  return s;
}

void restore(const std::vector<diff::TensorPtr>& params, const std::vector<Matrix>& s) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = s[i];
}

TargetModel freeze(const TargetModel& m) {
  TargetModel out;
  out.kind = m.kind;
  out.class_count = m.class_count;
  for (const auto& l : m.layers)
    out.layers.push_back(GcnLayer{diff::Tensor::make(l.weight->value(), false),
                                  diff::Tensor::make(l.bias->value(), false)});
  if (m.kind == ModelKind::kGraph)
    out.readout = GcnLayer{diff::Tensor::make(m.readout.weight->value(), false),
                           diff::Tensor::make(m.readout.bias->value(), false)};
  return out;
}

}  // namespace

TargetModel train_target(const DatasetBundle& bundle, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train_target: epochs must be >= 1");
  if (cfg.lr <= 0.0) throw std::invalid_argument("train_target: lr must be > 0");
  if (bundle.split.empty()) throw std::invalid_argument("train_target: bundle has no split");

  const ModelKind kind = bundle.task == Task::kNode ? ModelKind::kNode : ModelKind::kGraph;
  const std::size_t fdim =
      bundle.task == Task::kNode ? bundle.single().features.cols : bundle.graphs[0].features.cols;
  TargetModel model = make_target_model(kind, fdim, bundle.class_count, cfg.seed);
  const auto params = model.parameters();
  diff::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  diff::Adam adam(params, acfg);

  double best_val = -1.0;
  int best_epoch = -1;
  std::vector<Matrix> best_params = snapshot(params);
  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  if (kind == ModelKind::kNode) {
    const Graph& g = bundle.single();
    const auto features = diff::Tensor::make(g.features, false);
    const auto ahat = diff::Tensor::make(normalize_adjacency(g), false);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      diff::Tape tape;
      const auto logits = model_logits(tape, model, features, ahat);
      const auto loss = tape.softmax_cross_entropy(logits, g.node_labels, bundle.split.train);
      tape.backward(loss);
      adam.step();
      adam.zero_grad();

      int correct = 0;
      for (int v : bundle.split.validation)
        if (argmax_row(logits->value(), static_cast<std::size_t>(v)) ==
            g.node_labels[static_cast<std::size_t>(v)])
          ++correct;
      const double val_acc =
          static_cast<double>(correct) / static_cast<double>(bundle.split.validation.size());
      if (val_acc > best_val) {
        best_val = val_acc;
        best_epoch = epoch;
        best_params = snapshot(params);
      } else if (epoch - best_epoch > cfg.patience) {
        break;
      }
    }
  } else {
    std::vector<int> order = bundle.split.train;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      for (int gi : order) {
        const Graph& g = bundle.graphs[static_cast<std::size_t>(gi)];
        diff::Tape tape;
        const auto features = diff::Tensor::make(g.features, false);
        const auto ahat = diff::Tensor::make(normalize_weighted(g.adjacency), false);
        const auto logits = model_logits(tape, model, features, ahat);
        const auto loss =
            tape.softmax_cross_entropy(logits, std::vector<int>{*g.graph_label}, {0});
        tape.backward(loss);
        adam.step();
        adam.zero_grad();
      }
      const double val_acc = dataset_accuracy(model, bundle, bundle.split.validation);
      if (val_acc > best_val) {
        best_val = val_acc;
        best_epoch = epoch;
        best_params = snapshot(params);
      } else if (epoch - best_epoch > cfg.patience) {
        break;
      }
    }
  }

  restore(params, best_params);
  return freeze(model);
}

double dataset_accuracy(const TargetModel& m, const DatasetBundle& bundle,
                        const std::vector<int>& instances) {
  if (instances.empty()) throw std::invalid_argument("dataset_accuracy: empty instance set");
  int correct = 0;
  if (bundle.task == Task::kNode) {
    const Graph& g = bundle.single();
    const Matrix probs = forward_probs(m, g);
    for (int v : instances)
      if (argmax_row(probs, static_cast<std::size_t>(v)) ==
          g.node_labels[static_cast<std::size_t>(v)])
        ++correct;
  } else {
    for (int gi : instances) {
      const Graph& g = bundle.graphs[static_cast<std::size_t>(gi)];
      if (predict(m, g) == *g.graph_label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(instances.size());
}

namespace {

nlohmann::json layer_to_json(const GcnLayer& l) {
  nlohmann::json j;
  j["in"] = l.weight->rows();
  j["out"] = l.weight->cols();
  j["weight"] = l.weight->value().data;
  j["bias"] = l.bias->value().data;
  return j;
}

GcnLayer layer_from_json(const nlohmann::json& j, bool trainable) {
  const auto in = j.at("in").get<std::size_t>();
  const auto out = j.at("out").get<std::size_t>();
  Matrix w(in, out), b(1, out);
  w.data = j.at("weight").get<std::vector<double>>();
  b.data = j.at("bias").get<std::vector<double>>();
  if (w.data.size() != in * out || b.data.size() != out)
    throw std::runtime_error("model checkpoint: parameter array size mismatch");
  return GcnLayer{diff::Tensor::make(std::move(w), trainable),
                  diff::Tensor::make(std::move(b), trainable)};
}

}  // namespace

std::string model_to_json(const TargetModel& m) {
  nlohmann::json j;
  j["kind"] = m.kind == ModelKind::kNode ? "node" : "graph";
  j["class_count"] = m.class_count;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back(layer_to_json(l));
  j["layers"] = std::move(layers);
  if (m.kind == ModelKind::kGraph) j["readout"] = layer_to_json(m.readout);
  return j.dump(2) + "\n";
}

TargetModel model_from_json(const std::string& text, bool trainable) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TargetModel m;
  m.kind = j.at("kind").get<std::string>() == "node" ? ModelKind::kNode : ModelKind::kGraph;
  m.class_count = j.at("class_count").get<int>();
  for (const auto& lj : j.at("layers")) m.layers.push_back(layer_from_json(lj, trainable));
  if (m.kind == ModelKind::kGraph) m.readout = layer_from_json(j.at("readout"), trainable);
  return m;
}

}  // namespace ganx
