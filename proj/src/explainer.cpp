#include "ganx/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ganx/rng.hpp"

namespace ganx {

namespace {

constexpr double kProbEps = 1e-12;

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-limit, limit);
  return m;
}

GcnLayer make_layer(std::size_t in, std::size_t out, Rng& rng) {
  return GcnLayer{diff::Tensor::parameter(glorot(in, out, rng)),
                  diff::Tensor::parameter(Matrix(1, out))};
}

Matrix concat_prediction_onehot(const Matrix& features, int predicted_class, int class_count) {
  Matrix out(features.rows, features.cols + static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < features.rows; ++i) {
    for (std::size_t j = 0; j < features.cols; ++j) out(i, j) = features(i, j);
    out(i, features.cols + static_cast<std::size_t>(predicted_class)) = 1.0;
  }
  return out;
}

}  // namespace

std::size_t Generator::graph_feature_dim() const {
  if (encoder.empty()) throw std::logic_error("Generator: no encoder layers");
  return encoder.front().weight->rows() - static_cast<std::size_t>(class_count);
}

std::vector<diff::TensorPtr> Generator::parameters() const {
  std::vector<diff::TensorPtr> p;
  for (const auto& l : encoder) {
    p.push_back(l.weight);
    p.push_back(l.bias);
  }
  p.push_back(dec_w1);
  p.push_back(dec_b1);
  p.push_back(dec_w2);
  p.push_back(dec_b2);
  return p;
}

std::vector<diff::TensorPtr> Discriminator::parameters() const {
  std::vector<diff::TensorPtr> p;
  for (const auto& l : convs) {
    p.push_back(l.weight);
    p.push_back(l.bias);
  }
  p.push_back(out_weight);
  p.push_back(out_bias);
  return p;
}

ExplainerConfig ExplainerConfig::defaults_for(const std::string& dataset_name) {
  ExplainerConfig cfg;
  const bool synthetic = dataset_name == "ba-shapes" || dataset_name == "tree-cycles";
  if (synthetic) {
    cfg.lambda = 2.0;
    cfg.encoder_depth = 6;
    cfg.epochs = 300;
  } else {
    cfg.lambda = 3.0;
    cfg.encoder_depth = 7;
    cfg.epochs = 100;
  }
  if (dataset_name == "ba-shapes")
    cfg.validation_ks = {5, 6, 7, 8, 9};
  else if (dataset_name == "tree-cycles")
    cfg.validation_ks = {6, 7, 8, 9, 10};
  else
    cfg.validation_ks = {15, 20, 25, 30};
  return cfg;
}

Generator make_generator(std::size_t graph_feature_dim, int class_count, int depth, int hidden,
                         std::uint64_t seed) {
  if (depth < 2) throw std::invalid_argument("make_generator: encoder depth must be >= 2");
  Rng rng(seed);
  const auto h = static_cast<std::size_t>(hidden);
  Generator gen;
  gen.class_count = class_count;
  std::size_t in = graph_feature_dim + static_cast<std::size_t>(class_count);
  for (int i = 0; i < depth; ++i) {
    gen.encoder.push_back(make_layer(in, h, rng));
    in = h;
  }
  gen.dec_w1 = diff::Tensor::parameter(glorot(h, h, rng));
  gen.dec_b1 = diff::Tensor::parameter(Matrix(1, h));
  gen.dec_w2 = diff::Tensor::parameter(glorot(h, 1, rng));
  gen.dec_b2 = diff::Tensor::parameter(Matrix(1, 1));
  return gen;
}

Discriminator make_discriminator(std::size_t feature_dim, int hidden, std::uint64_t seed) {
  Rng rng(seed);
  const auto h = static_cast<std::size_t>(hidden);
  Discriminator disc;
  disc.convs.push_back(make_layer(feature_dim, h, rng));
  disc.convs.push_back(make_layer(h, h, rng));
  disc.convs.push_back(make_layer(h, h, rng));
  disc.out_weight = diff::Tensor::parameter(glorot(h, 1, rng));
  disc.out_bias = diff::Tensor::parameter(Matrix(1, 1));
  return disc;
}

GeneratorForward generator_forward(diff::Tape& tape, const Generator& gen, const Graph& g,
                                   int predicted_class) {
  if (predicted_class < 0 || predicted_class >= gen.class_count)
    throw std::invalid_argument("generator_forward: predicted class out of range");
  if (g.features.cols != gen.graph_feature_dim())
    throw std::invalid_argument("generator_forward: feature width mismatch (" +
                                g.features.shape_str() + ", expected width " +
                                std::to_string(gen.graph_feature_dim()) + ")");

  GeneratorForward fwd;
  fwd.edges = g.undirected_edges();

  const auto x = diff::Tensor::make(
      concat_prediction_onehot(g.features, predicted_class, gen.class_count), false);
  const auto ahat = diff::Tensor::make(normalize_weighted(g.adjacency), false);

  diff::TensorPtr h = x;
  for (std::size_t li = 0; li < gen.encoder.size(); ++li) {
    h = tape.add_bias(tape.matmul(ahat, tape.matmul(h, gen.encoder[li].weight)),
                      gen.encoder[li].bias);
    if (li + 1 < gen.encoder.size()) h = tape.relu(h);
  }

  std::vector<int> heads, tails;
  heads.reserve(fwd.edges.size());
  tails.reserve(fwd.edges.size());
  for (const auto& [i, j] : fwd.edges) {
    heads.push_back(i);
    tails.push_back(j);
  }
  const auto edge_feat = tape.mul(tape.gather_rows(h, heads), tape.gather_rows(h, tails));
  const auto hidden = tape.relu(tape.add_bias(tape.matmul(edge_feat, gen.dec_w1), gen.dec_b1));
  const auto logits = tape.add_bias(tape.matmul(hidden, gen.dec_w2), gen.dec_b2);
  fwd.scores = tape.sigmoid(logits);
  fwd.w = tape.scatter_symmetric(fwd.scores, fwd.edges, g.node_count);
  return fwd;
}

diff::TensorPtr renormalized_masked(diff::Tape& tape, const diff::TensorPtr& w,
                                    const diff::TensorPtr& adjacency,
                                    const diff::TensorPtr& identity) {
  const auto masked = tape.mul(w, adjacency);
  const auto with_loops = tape.add(masked, identity);
  const auto inv_sqrt_deg = tape.rsqrt(tape.row_sum(with_loops));
  return tape.scale_cols(tape.scale_rows(with_loops, inv_sqrt_deg), inv_sqrt_deg);
}

WeightMatrix generate(const Generator& gen, const Graph& g, int predicted_class) {
  diff::Tape tape(false);
  const GeneratorForward fwd = generator_forward(tape, gen, g, predicted_class);
  return make_weight_matrix(fwd.w->value(), g);
}

diff::TensorPtr discriminator_logit(diff::Tape& tape, const Discriminator& disc,
                                    const diff::TensorPtr& ahat,
                                    const diff::TensorPtr& features) {
  diff::TensorPtr h = features;
  for (const auto& l : disc.convs)
    h = tape.relu(tape.add_bias(tape.matmul(ahat, tape.matmul(h, l.weight)), l.bias));
  return tape.add_bias(tape.matmul(tape.mean_rows(h), disc.out_weight), disc.out_bias);
}

double discriminate(const Discriminator& disc, const Graph& g, const WeightMatrix* weights) {
  diff::Tape tape(false);
  Matrix ahat;
  if (weights == nullptr) {
    ahat = normalize_adjacency(g);
  } else {
    ahat = normalize_weighted(apply_mask(g, *weights).weighted);
  }
  const auto logit = discriminator_logit(tape, disc, diff::Tensor::make(std::move(ahat), false),
                                         diff::Tensor::make(g.features, false));
  const double p = diff::stable_sigmoid(logit->scalar());
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

double discriminator_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
  if (d_real.empty() || d_fake.empty())
    throw std::invalid_argument("discriminator_loss: empty minibatch");
  double real_term = 0.0;
  for (double d : d_real) real_term += std::log(std::clamp(d, kProbEps, 1.0 - kProbEps));
  double fake_term = 0.0;
  for (double d : d_fake) fake_term += std::log(1.0 - std::clamp(d, kProbEps, 1.0 - kProbEps));
  return -real_term / static_cast<double>(d_real.size()) -
         fake_term / static_cast<double>(d_fake.size());
}

double fidelity_term(const Matrix& f_orig, const Matrix& f_masked, Task task) {
  if (!f_orig.same_shape(f_masked))
    throw std::invalid_argument("fidelity_term: shape mismatch (" + f_orig.shape_str() + " vs " +
                                f_masked.shape_str() + ")");
  double total = 0.0;
  for (std::size_t i = 0; i < f_orig.data.size(); ++i) {
    const double d = f_orig.data[i] - f_masked.data[i];
    total += d * d;
  }
  const double denom = task == Task::kNode ? static_cast<double>(f_orig.rows)
                                           : static_cast<double>(f_orig.cols);
  return total / denom;
}

double generator_loss(const std::vector<double>& d_fake, const Matrix& f_orig,
                      const Matrix& f_masked, double lambda, Task task) {
  if (lambda <= 0.0) throw std::invalid_argument("generator_loss: lambda must be > 0");
  if (d_fake.empty()) throw std::invalid_argument("generator_loss: empty minibatch");
  double adv = 0.0;
  for (double d : d_fake) adv += std::log(1.0 - std::clamp(d, kProbEps, 1.0 - kProbEps));
  adv /= static_cast<double>(d_fake.size());
  return adv + lambda * fidelity_term(f_orig, f_masked, task);
}

namespace {

// Everything constant about one training instance, precomputed once.
struct InstanceContext {
  int id = -1;
  Graph graph;
  int target_local = -1;
  int pred_class = -1;
  std::vector<Edge> edges;
  diff::TensorPtr adjacency;   // const A
  diff::TensorPtr identity;    // const I
  diff::TensorPtr ahat;        // const normalized binary adjacency
  diff::TensorPtr model_x;     // const dataset features
  diff::TensorPtr p_orig;      // const model probabilities on the instance
  diff::TensorPtr distilled;   // const E x 1 target scores (train only)
};

InstanceContext build_context(const DatasetBundle& bundle, const TargetModel& model,
                              int instance, int hops) {
  InstanceContext ctx;
  InstanceView view = make_instance_view(bundle, instance, hops);
  ctx.id = instance;
  ctx.graph = std::move(view.graph);
  ctx.target_local = view.target_local;
  ctx.edges = ctx.graph.undirected_edges();
  const std::size_t n = ctx.graph.node_count;
  ctx.adjacency = diff::Tensor::make(ctx.graph.adjacency, false);
  ctx.identity = diff::Tensor::make(Matrix::identity(n), false);
  const Matrix ahat = normalize_weighted(ctx.graph.adjacency);
  ctx.ahat = diff::Tensor::make(ahat, false);
  ctx.model_x = diff::Tensor::make(ctx.graph.features, false);
  const Matrix probs = forward_probs_raw(model, ctx.graph.features, ahat);
  ctx.pred_class = argmax_row(
      probs, ctx.target_local >= 0 ? static_cast<std::size_t>(ctx.target_local) : 0);
  ctx.p_orig = diff::Tensor::make(probs, false);
  return ctx;
}

double mean_accuracy_over_ks(const Generator& gen, const TargetModel& model,
                             const std::vector<InstanceContext>& instances,
                             const std::vector<int>& ks) {
  if (instances.empty() || ks.empty()) return 0.0;
  double total = 0.0;
  for (const InstanceContext& ctx : instances) {
    const WeightMatrix w = generate(gen, ctx.graph, ctx.pred_class);
    Explanation weighted = apply_mask(ctx.graph, w);
    const std::optional<int> target =
        ctx.target_local >= 0 ? std::optional<int>(ctx.target_local) : std::nullopt;
    const int original = ctx.pred_class;
    int matches = 0;
    for (int k : ks) {
      const Explanation topk = topk_edges(weighted, k);
      const WeightMatrix mask = make_weight_matrix(topk.binary(), ctx.graph);
      if (predict(model, ctx.graph, &mask, target) == original) ++matches;
    }
    total += static_cast<double>(matches) / static_cast<double>(ks.size());
  }
  return total / static_cast<double>(instances.size());
}

std::vector<Matrix> snapshot(const std::vector<diff::TensorPtr>& params) {
  std::vector<Matrix> s;
  s.reserve(params.size());
  for (const auto& p : params) s.push_back(p->value());
  return s;
}

void restore(const std::vector<diff::TensorPtr>& params, const std::vector<Matrix>& s) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = s[i];
}

}  // namespace

TrainedExplainer train_explainer(const DatasetBundle& bundle, const TargetModel& model,
                                 const std::vector<DistilledTarget>& targets,
                                 const ExplainerConfig& cfg) {
  if (cfg.lambda <= 0.0) throw std::invalid_argument("train_explainer: lambda must be > 0");
  if (cfg.epochs < 0) throw std::invalid_argument("train_explainer: epochs must be >= 0");
  if (bundle.split.empty()) throw std::invalid_argument("train_explainer: bundle has no split");
  if (cfg.validation_ks.empty())
    throw std::invalid_argument("train_explainer: validation_ks must not be empty");

  std::map<int, const DistilledTarget*> by_id;
  for (const DistilledTarget& t : targets) by_id[t.instance_id] = &t;

  const std::vector<int> train_ids = explanation_instances(bundle, bundle.split.train);
  const std::vector<int> val_ids = explanation_instances(bundle, bundle.split.validation);
  {
    std::string missing;
    for (int id : train_ids)
      if (by_id.find(id) == by_id.end()) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
    if (!missing.empty())
      throw std::runtime_error("train_explainer: missing distilled targets for instances: " +
                               missing);
  }

  std::vector<InstanceContext> train_ctx, val_ctx;
  train_ctx.reserve(train_ids.size());
  for (int id : train_ids) {
    InstanceContext ctx = build_context(bundle, model, id, cfg.hops);
    const DistilledTarget& t = *by_id.at(id);
    Matrix scores(ctx.edges.size(), 1);
    if (t.weights.rows != ctx.graph.node_count)
      throw std::runtime_error("train_explainer: distilled target shape mismatch for instance " +
                               std::to_string(id));
    for (std::size_t e = 0; e < ctx.edges.size(); ++e)
      scores(e, 0) = t.weights(static_cast<std::size_t>(ctx.edges[e].first),
                               static_cast<std::size_t>(ctx.edges[e].second));
    ctx.distilled = diff::Tensor::make(std::move(scores), false);
    train_ctx.push_back(std::move(ctx));
  }
  val_ctx.reserve(val_ids.size());
  for (int id : val_ids) val_ctx.push_back(build_context(bundle, model, id, cfg.hops));

  const std::size_t fdim = train_ctx.empty() ? bundle.graphs[0].features.cols
                                             : train_ctx[0].graph.features.cols;
  TrainedExplainer result;
  result.generator =
      make_generator(fdim, model.class_count, cfg.encoder_depth, cfg.hidden, cfg.seed);
  result.discriminator = make_discriminator(fdim, cfg.hidden, cfg.seed ^ 0xd1b54a32d192ed03ull);

  diff::AdamConfig gen_acfg;
  gen_acfg.lr = cfg.gen_lr;
  diff::AdamConfig disc_acfg;
  disc_acfg.lr = cfg.disc_lr;
  diff::Adam adam_gen(result.generator.parameters(), gen_acfg);
  diff::Adam adam_disc(result.discriminator.parameters(), disc_acfg);

  const auto gen_params = result.generator.parameters();
  std::vector<Matrix> best = snapshot(gen_params);
  double best_val = -1.0;
  int best_epoch = 0;
  Rng shuffle_rng(cfg.seed ^ 0x2545f4914f6cdd1dull);
  std::vector<int> order(train_ctx.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  const Task task = bundle.task;
  const double fid_scale =
      task == Task::kNode ? static_cast<double>(model.class_count) : 1.0;

  auto evaluate = [&](int epoch) {
    const double acc =
        mean_accuracy_over_ks(result.generator, model, val_ctx, cfg.validation_ks);
    if (acc > best_val) {
      best_val = acc;
      best_epoch = epoch;
      best = snapshot(gen_params);
    }
  };

  evaluate(0);
  int epoch = 0;
  while (epoch < cfg.epochs) {
    ++epoch;
    shuffle_rng.shuffle(order);
    for (int oi : order) {
      const InstanceContext& ctx = train_ctx[static_cast<std::size_t>(oi)];
      if (ctx.edges.empty()) continue;

      // Discriminator phase: real = binary adjacency, fake = current mask
      // (held constant so only the discriminator moves).
      Matrix masked;
      {
        diff::Tape scratch(false);
        masked = generator_forward(scratch, result.generator, ctx.graph, ctx.pred_class)
                     .w->value();
        for (std::size_t i = 0; i < masked.data.size(); ++i)
          masked.data[i] *= ctx.graph.adjacency.data[i];
      }
      for (int ds = 0; ds < cfg.disc_steps; ++ds) {
        diff::Tape tape;
        const auto fake_ahat = diff::Tensor::make(normalize_weighted(masked), false);
        const auto d_real = discriminator_logit(tape, result.discriminator, ctx.ahat, ctx.model_x);
        const auto d_fake = discriminator_logit(tape, result.discriminator, fake_ahat, ctx.model_x);
        const auto loss = tape.scale(
            tape.add(tape.mean_all(tape.log_sigmoid(d_real)),
                     tape.mean_all(tape.log_one_minus_sigmoid(d_fake))),
            -1.0);
        tape.backward(loss);
        adam_disc.step();
        adam_disc.zero_grad();
      }

      // Generator phase: adversarial term + fidelity toward the model's
      // original prediction + supervision toward the distilled target.
      {
        diff::Tape tape;
        const GeneratorForward fwd =
            generator_forward(tape, result.generator, ctx.graph, ctx.pred_class);
        const auto ahat_fake = renormalized_masked(tape, fwd.w, ctx.adjacency, ctx.identity);
        const auto masked_probs =
            tape.softmax(model_logits(tape, model, ctx.model_x, ahat_fake));
        const auto fidelity = tape.scale(tape.mse(masked_probs, ctx.p_orig), fid_scale);
        const auto d_fake =
            discriminator_logit(tape, result.discriminator, ahat_fake, ctx.model_x);
        const auto adversarial = tape.mean_all(tape.log_one_minus_sigmoid(d_fake));
        auto loss = tape.add(adversarial, tape.scale(fidelity, cfg.lambda));
        if (cfg.aux_weight > 0.0)
          loss = tape.add(loss, tape.scale(tape.mse(fwd.scores, ctx.distilled), cfg.aux_weight));
        tape.backward(loss);
        adam_gen.step();
        adam_gen.zero_grad();
        adam_disc.zero_grad();  // gradient also flowed into the discriminator
      }
    }

    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) evaluate(epoch);
    if (best_val >= 1.0) break;
    if (epoch - best_epoch >= cfg.patience) break;
  }
  if (epoch % cfg.eval_every != 0 && epoch != cfg.epochs) evaluate(epoch);

  restore(gen_params, best);
  result.best_validation_accuracy = best_val;
  result.best_epoch = best_epoch;
  result.epochs_run = epoch;
  return result;
}

ExplainResult explain(const Generator& gen, const TargetModel& model,
                      const DatasetBundle& bundle, int instance, int k, int hops) {
  if (k < 1) throw std::invalid_argument("explain: k must be >= 1");
  ExplainResult res;
  res.view = make_instance_view(bundle, instance, hops);
  const std::optional<int> target =
      res.view.target_local >= 0 ? std::optional<int>(res.view.target_local) : std::nullopt;
  res.predicted_class = predict(model, res.view.graph, nullptr, target);
  const WeightMatrix w = generate(gen, res.view.graph, res.predicted_class);
  Explanation weighted = apply_mask(res.view.graph, w);
  weighted.target = target;
  res.explanation = topk_edges(weighted, k);
  res.explanation.target = target;
  res.global_edges.reserve(res.explanation.edge_set.size());
  for (const auto& [i, j] : res.explanation.edge_set) {
    const int gi = res.view.to_global[static_cast<std::size_t>(i)];
    const int gj = res.view.to_global[static_cast<std::size_t>(j)];
    res.global_edges.emplace_back(std::min(gi, gj), std::max(gi, gj));
  }
  std::sort(res.global_edges.begin(), res.global_edges.end());
  return res;
}

double explanation_accuracy_over(const Generator& gen, const TargetModel& model,
                                 const DatasetBundle& bundle, const std::vector<int>& instances,
                                 int k, int hops) {
  if (instances.empty())
    throw std::invalid_argument("explanation_accuracy_over: empty instance set");
  int matches = 0;
  for (int id : instances) {
    const ExplainResult res = explain(gen, model, bundle, id, k, hops);
    const std::optional<int> target = res.explanation.target;
    const WeightMatrix mask = make_weight_matrix(res.explanation.binary(), res.view.graph);
    if (predict(model, res.view.graph, &mask, target) == res.predicted_class) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(instances.size());
}

namespace {

nlohmann::json layer_json(const GcnLayer& l) {
  nlohmann::json j;
  j["in"] = l.weight->rows();
  j["out"] = l.weight->cols();
  j["weight"] = l.weight->value().data;
  j["bias"] = l.bias->value().data;
  return j;
}

GcnLayer layer_from(const nlohmann::json& j) {
  const auto in = j.at("in").get<std::size_t>();
  const auto out = j.at("out").get<std::size_t>();
  Matrix w(in, out), b(1, out);
  w.data = j.at("weight").get<std::vector<double>>();
  b.data = j.at("bias").get<std::vector<double>>();
  if (w.data.size() != in * out || b.data.size() != out)
    throw std::runtime_error("explainer checkpoint: parameter array size mismatch");
  return GcnLayer{diff::Tensor::parameter(std::move(w)), diff::Tensor::parameter(std::move(b))};
}

nlohmann::json dense_json(const diff::TensorPtr& w) {
  nlohmann::json j;
  j["rows"] = w->rows();
  j["cols"] = w->cols();
  j["data"] = w->value().data;
  return j;
}

diff::TensorPtr dense_from(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols)
    throw std::runtime_error("explainer checkpoint: parameter array size mismatch");
  return diff::Tensor::parameter(std::move(m));
}

nlohmann::json config_json(const ExplainerConfig& cfg) {
  nlohmann::json j;
  j["lambda"] = cfg.lambda;
  j["epochs"] = cfg.epochs;
  j["gen_lr"] = cfg.gen_lr;
  j["disc_lr"] = cfg.disc_lr;
  j["seed"] = cfg.seed;
  j["encoder_depth"] = cfg.encoder_depth;
  j["disc_steps"] = cfg.disc_steps;
  j["hidden"] = cfg.hidden;
  j["hops"] = cfg.hops;
  j["aux_weight"] = cfg.aux_weight;
  j["eval_every"] = cfg.eval_every;
  j["patience"] = cfg.patience;
  j["validation_ks"] = cfg.validation_ks;
  return j;
}

ExplainerConfig config_from(const nlohmann::json& j) {
  ExplainerConfig cfg;
  cfg.lambda = j.at("lambda").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.gen_lr = j.at("gen_lr").get<double>();
  cfg.disc_lr = j.at("disc_lr").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.encoder_depth = j.at("encoder_depth").get<int>();
  cfg.disc_steps = j.at("disc_steps").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.hops = j.at("hops").get<int>();
  cfg.aux_weight = j.at("aux_weight").get<double>();
  cfg.eval_every = j.at("eval_every").get<int>();
  cfg.patience = j.at("patience").get<int>();
  cfg.validation_ks = j.at("validation_ks").get<std::vector<int>>();
  return cfg;
}

}  // namespace

std::string explainer_to_json(const TrainedExplainer& trained, const ExplainerConfig& cfg,
                              const std::string& dataset, const std::string& model_checksum) {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["model_checksum"] = model_checksum;
  j["config"] = config_json(cfg);
  j["best_validation_accuracy"] = trained.best_validation_accuracy;
  j["best_epoch"] = trained.best_epoch;
  j["epochs_run"] = trained.epochs_run;
  nlohmann::json gen;
  gen["class_count"] = trained.generator.class_count;
  nlohmann::json enc = nlohmann::json::array();
  for (const auto& l : trained.generator.encoder) enc.push_back(layer_json(l));
  gen["encoder"] = std::move(enc);
  gen["dec_w1"] = dense_json(trained.generator.dec_w1);
  gen["dec_b1"] = dense_json(trained.generator.dec_b1);
  gen["dec_w2"] = dense_json(trained.generator.dec_w2);
  gen["dec_b2"] = dense_json(trained.generator.dec_b2);
  j["generator"] = std::move(gen);
  nlohmann::json disc;
  nlohmann::json convs = nlohmann::json::array();
  for (const auto& l : trained.discriminator.convs) convs.push_back(layer_json(l));
  disc["convs"] = std::move(convs);
  disc["out_weight"] = dense_json(trained.discriminator.out_weight);
  disc["out_bias"] = dense_json(trained.discriminator.out_bias);
  j["discriminator"] = std::move(disc);
  return j.dump(2) + "\n";
}

TrainedExplainer explainer_from_json(const std::string& text, ExplainerConfig* cfg_out,
                                     std::string* dataset_out, std::string* model_checksum_out) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (cfg_out != nullptr) *cfg_out = config_from(j.at("config"));
  if (dataset_out != nullptr) *dataset_out = j.at("dataset").get<std::string>();
  if (model_checksum_out != nullptr)
    *model_checksum_out = j.at("model_checksum").get<std::string>();
  TrainedExplainer t;
  t.best_validation_accuracy = j.at("best_validation_accuracy").get<double>();
  t.best_epoch = j.at("best_epoch").get<int>();
  t.epochs_run = j.at("epochs_run").get<int>();
  t.generator.class_count = j.at("generator").at("class_count").get<int>();
  for (const auto& lj : j.at("generator").at("encoder"))
    t.generator.encoder.push_back(layer_from(lj));
  t.generator.dec_w1 = dense_from(j.at("generator").at("dec_w1"));
  t.generator.dec_b1 = dense_from(j.at("generator").at("dec_b1"));
  t.generator.dec_w2 = dense_from(j.at("generator").at("dec_w2"));
  t.generator.dec_b2 = dense_from(j.at("generator").at("dec_b2"));
  for (const auto& lj : j.at("discriminator").at("convs"))
    t.discriminator.convs.push_back(layer_from(lj));
  t.discriminator.out_weight = dense_from(j.at("discriminator").at("out_weight"));
  t.discriminator.out_bias = dense_from(j.at("discriminator").at("out_bias"));
  return t;
}

}  // namespace ganx
