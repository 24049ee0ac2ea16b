#include "ganx/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ganx::diff {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string shapes(const Matrix& a, const Matrix& b) {
  return a.shape_str() + " vs " + b.shape_str();
}

constexpr double kProbEps = 1e-12;

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  // log(1 + e^x), safe for large |x|.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

TensorPtr Tape::record(const char* op, Matrix out_value, bool needs_grad,
                       std::function<void(Tensor&)> make_backprop) {
  if (backward_done_)
    throw std::logic_error(std::string(op) +
                           ": record already consumed by backward(); clear() first");
  if (!all_finite(out_value))
    throw std::runtime_error(std::string(op) + ": non-finite value in output");
  needs_grad = needs_grad && recording_;
  auto out = Tensor::make(std::move(out_value), needs_grad);
  if (needs_grad) {
    nodes_.push_back(Node{op, [out, fn = std::move(make_backprop)]() { fn(*out); }});
  }
  return out;
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
  require(a->cols() == b->rows(),
          "matmul: shape mismatch (" + shapes(a->value(), b->value()) + ")");
  Matrix out;
  matmul_into(a->value(), b->value(), out);
  return record("matmul", std::move(out), a->requires_grad() || b->requires_grad(),
                [a, b](Tensor& o) {
                  if (a->requires_grad()) matmul_a_bt_into(o.grad(), b->value(), a->grad(), true);
                  if (b->requires_grad()) matmul_at_b_into(a->value(), o.grad(), b->grad(), true);
                });
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
  require(a->value().same_shape(b->value()),
          "add: shape mismatch (" + shapes(a->value(), b->value()) + ")");
  Matrix out = a->value();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value().data[i];
  return record("add", std::move(out), a->requires_grad() || b->requires_grad(),
                [a, b](Tensor& o) {
                  if (a->requires_grad())
                    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
                      a->grad().data[i] += o.grad().data[i];
                  if (b->requires_grad())
                    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
                      b->grad().data[i] += o.grad().data[i];
                });
}

TensorPtr Tape::mul(const TensorPtr& a, const TensorPtr& b) {
  require(a->value().same_shape(b->value()),
          "mul: shape mismatch (" + shapes(a->value(), b->value()) + ")");
  Matrix out = a->value();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->value().data[i];
  return record("mul", std::move(out), a->requires_grad() || b->requires_grad(),
                [a, b](Tensor& o) {
                  if (a->requires_grad())
                    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
                      a->grad().data[i] += o.grad().data[i] * b->value().data[i];
                  if (b->requires_grad())
                    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
                      b->grad().data[i] += o.grad().data[i] * a->value().data[i];
                });
}

TensorPtr Tape::scale(const TensorPtr& a, double c) {
  Matrix out = a->value();
  for (double& v : out.data) v *= c;
  return record("scale", std::move(out), a->requires_grad(), [a, c](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      a->grad().data[i] += c * o.grad().data[i];
  });
}

TensorPtr Tape::add_scalar(const TensorPtr& a, double c) {
  Matrix out = a->value();
  for (double& v : out.data) v += c;
  return record("add_scalar", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      a->grad().data[i] += o.grad().data[i];
  });
}

TensorPtr Tape::add_bias(const TensorPtr& a, const TensorPtr& bias) {
  require(bias->rows() == 1 && bias->cols() == a->cols(),
          "add_bias: shape mismatch (" + shapes(a->value(), bias->value()) + ")");
  Matrix out = a->value();
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += bias->value()(0, j);
  return record("add_bias", std::move(out), a->requires_grad() || bias->requires_grad(),
                [a, bias](Tensor& o) {
                  if (a->requires_grad())
                    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
                      a->grad().data[i] += o.grad().data[i];
                  if (bias->requires_grad())
                    for (std::size_t i = 0; i < o.grad().rows; ++i)
                      for (std::size_t j = 0; j < o.grad().cols; ++j)
                        bias->grad()(0, j) += o.grad()(i, j);
                });
}

TensorPtr Tape::relu(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return record("relu", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      if (a->value().data[i] > 0.0) a->grad().data[i] += o.grad().data[i];
  });
}

TensorPtr Tape::sigmoid(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = stable_sigmoid(v);
  return record("sigmoid", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i) {
      const double s = o.value().data[i];
      a->grad().data[i] += o.grad().data[i] * s * (1.0 - s);
    }
  });
}

TensorPtr Tape::log(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = std::log(v);
  return record("log", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      a->grad().data[i] += o.grad().data[i] / a->value().data[i];
  });
}

TensorPtr Tape::rsqrt(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = 1.0 / std::sqrt(v);
  return record("rsqrt", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i) {
      const double r = o.value().data[i];
      a->grad().data[i] += o.grad().data[i] * (-0.5 * r * r * r);
    }
  });
}

TensorPtr Tape::softmax(const TensorPtr& a) {
  Matrix out = a->value();
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
  return record("softmax", std::move(out), a->requires_grad(), [a](Tensor& o) {
    // dz_j = y_j * (dy_j - sum_k dy_k y_k), per row
    for (std::size_t i = 0; i < o.grad().rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < o.grad().cols; ++j) dot += o.grad()(i, j) * o.value()(i, j);
      for (std::size_t j = 0; j < o.grad().cols; ++j)
        a->grad()(i, j) += o.value()(i, j) * (o.grad()(i, j) - dot);
    }
  });
}

TensorPtr Tape::row_sum(const TensorPtr& a) {
  Matrix out(a->rows(), 1);
  for (std::size_t i = 0; i < a->rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a->cols(); ++j) s += a->value()(i, j);
    out(i, 0) = s;
  }
  return record("row_sum", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < a->grad().rows; ++i)
      for (std::size_t j = 0; j < a->grad().cols; ++j) a->grad()(i, j) += o.grad()(i, 0);
  });
}

TensorPtr Tape::mean_rows(const TensorPtr& a) {
  require(a->rows() > 0, "mean_rows: empty input");
  Matrix out(1, a->cols());
  for (std::size_t j = 0; j < a->cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->rows(); ++i) s += a->value()(i, j);
    out(0, j) = s / static_cast<double>(a->rows());
  }
  return record("mean_rows", std::move(out), a->requires_grad(), [a](Tensor& o) {
    const double inv = 1.0 / static_cast<double>(a->rows());
    for (std::size_t i = 0; i < a->grad().rows; ++i)
      for (std::size_t j = 0; j < a->grad().cols; ++j)
        a->grad()(i, j) += o.grad()(0, j) * inv;
  });
}

TensorPtr Tape::mean_all(const TensorPtr& a) {
  require(a->value().size() > 0, "mean_all: empty input");
  double s = 0.0;
  for (double v : a->value().data) s += v;
  Matrix out(1, 1);
  out(0, 0) = s / static_cast<double>(a->value().size());
  return record("mean_all", std::move(out), a->requires_grad(), [a](Tensor& o) {
    const double g = o.grad()(0, 0) / static_cast<double>(a->value().size());
    for (double& v : a->grad().data) v += g;
  });
}

TensorPtr Tape::scale_rows(const TensorPtr& a, const TensorPtr& s) {
  require(s->rows() == a->rows() && s->cols() == 1,
          "scale_rows: shape mismatch (" + shapes(a->value(), s->value()) + ")");
  Matrix out = a->value();
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= s->value()(i, 0);
  return record("scale_rows", std::move(out), a->requires_grad() || s->requires_grad(),
                [a, s](Tensor& o) {
                  for (std::size_t i = 0; i < o.grad().rows; ++i) {
                    const double sv = s->value()(i, 0);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < o.grad().cols; ++j) {
                      const double g = o.grad()(i, j);
                      if (a->requires_grad()) a->grad()(i, j) += g * sv;
                      acc += g * a->value()(i, j);
                    }
                    if (s->requires_grad()) s->grad()(i, 0) += acc;
                  }
                });
}

TensorPtr Tape::scale_cols(const TensorPtr& a, const TensorPtr& s) {
  require(s->rows() == a->cols() && s->cols() == 1,
          "scale_cols: shape mismatch (" + shapes(a->value(), s->value()) + ")");
  Matrix out = a->value();
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= s->value()(j, 0);
  return record("scale_cols", std::move(out), a->requires_grad() || s->requires_grad(),
                [a, s](Tensor& o) {
                  for (std::size_t i = 0; i < o.grad().rows; ++i)
                    for (std::size_t j = 0; j < o.grad().cols; ++j) {
                      const double g = o.grad()(i, j);
                      if (a->requires_grad()) a->grad()(i, j) += g * s->value()(j, 0);
                      if (s->requires_grad()) s->grad()(j, 0) += g * a->value()(i, j);
                    }
                });
}

TensorPtr Tape::gather_rows(const TensorPtr& a, std::vector<int> idx) {
  Matrix out(idx.size(), a->cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && static_cast<std::size_t>(idx[k]) < a->rows(),
            "gather_rows: row index out of range");
    for (std::size_t j = 0; j < a->cols(); ++j)
      out(k, j) = a->value()(static_cast<std::size_t>(idx[k]), j);
  }
  return record("gather_rows", std::move(out), a->requires_grad(),
                [a, idx = std::move(idx)](Tensor& o) {
                  for (std::size_t k = 0; k < idx.size(); ++k)
                    for (std::size_t j = 0; j < o.grad().cols; ++j)
                      a->grad()(static_cast<std::size_t>(idx[k]), j) += o.grad()(k, j);
                });
}

TensorPtr Tape::scatter_symmetric(const TensorPtr& v,
                                  std::vector<std::pair<int, int>> edges,
                                  std::size_t n) {
  require(v->cols() == 1 && v->rows() == edges.size(),
          "scatter_symmetric: expected one value per edge");
  Matrix out(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    require(i >= 0 && j >= 0 && static_cast<std::size_t>(i) < n &&
                static_cast<std::size_t>(j) < n && i != j,
            "scatter_symmetric: bad edge endpoint");
    out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v->value()(e, 0);
    out(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v->value()(e, 0);
  }
  return record("scatter_symmetric", std::move(out), v->requires_grad(),
                [v, edges = std::move(edges)](Tensor& o) {
                  for (std::size_t e = 0; e < edges.size(); ++e) {
                    const auto [i, j] = edges[e];
                    v->grad()(e, 0) += o.grad()(static_cast<std::size_t>(i),
                                                static_cast<std::size_t>(j)) +
                                       o.grad()(static_cast<std::size_t>(j),
                                                static_cast<std::size_t>(i));
                  }
                });
}

TensorPtr Tape::detach(const TensorPtr& a) { return Tensor::make(a->value(), false); }

TensorPtr Tape::log_sigmoid(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = -softplus(-v);
  return record("log_sigmoid", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      a->grad().data[i] += o.grad().data[i] * stable_sigmoid(-a->value().data[i]);
  });
}

TensorPtr Tape::log_one_minus_sigmoid(const TensorPtr& a) {
  Matrix out = a->value();
  for (double& v : out.data) v = -softplus(v);
  return record("log_one_minus_sigmoid", std::move(out), a->requires_grad(), [a](Tensor& o) {
    for (std::size_t i = 0; i < o.grad().data.size(); ++i)
      a->grad().data[i] -= o.grad().data[i] * stable_sigmoid(a->value().data[i]);
  });
}

TensorPtr Tape::mse(const TensorPtr& a, const TensorPtr& b) {
  require(a->value().same_shape(b->value()),
          "mse: shape mismatch (" + shapes(a->value(), b->value()) + ")");
  require(a->value().size() > 0, "mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a->value().data.size(); ++i) {
    const double d = a->value().data[i] - b->value().data[i];
    s += d * d;
  }
  Matrix out(1, 1);
  out(0, 0) = s / static_cast<double>(a->value().size());
  return record("mse", std::move(out), a->requires_grad() || b->requires_grad(),
                [a, b](Tensor& o) {
                  const double g = 2.0 * o.grad()(0, 0) / static_cast<double>(a->value().size());
                  for (std::size_t i = 0; i < a->value().data.size(); ++i) {
                    const double d = a->value().data[i] - b->value().data[i];
                    if (a->requires_grad()) a->grad().data[i] += g * d;
                    if (b->requires_grad()) b->grad().data[i] -= g * d;
                  }
                });
}

TensorPtr Tape::bce(const TensorPtr& p, const TensorPtr& y) {
  require(p->value().same_shape(y->value()),
          "bce: shape mismatch (" + shapes(p->value(), y->value()) + ")");
  require(p->value().size() > 0, "bce: empty input");
  const auto n = static_cast<double>(p->value().size());
  double s = 0.0;
  for (std::size_t i = 0; i < p->value().data.size(); ++i) {
    const double pc = std::clamp(p->value().data[i], kProbEps, 1.0 - kProbEps);
    const double yv = y->value().data[i];
    s += -(yv * std::log(pc) + (1.0 - yv) * std::log(1.0 - pc));
  }
  Matrix out(1, 1);
  out(0, 0) = s / n;
  return record("bce", std::move(out), p->requires_grad(), [p, y, n](Tensor& o) {
    const double g = o.grad()(0, 0) / n;
    for (std::size_t i = 0; i < p->value().data.size(); ++i) {
      const double pv = p->value().data[i];
      if (pv <= kProbEps || pv >= 1.0 - kProbEps) continue;  // clamp region is flat
      const double yv = y->value().data[i];
      p->grad().data[i] += g * (-yv / pv + (1.0 - yv) / (1.0 - pv));
    }
  });
}

TensorPtr Tape::softmax_cross_entropy(const TensorPtr& logits,
                                      const std::vector<int>& labels,
                                      const std::vector<int>& rows) {
  require(!rows.empty(), "softmax_cross_entropy: empty row set");
  require(labels.size() == logits->rows(), "softmax_cross_entropy: one label per row required");
  const std::size_t c = logits->cols();
  double total = 0.0;
  for (int r : rows) {
    require(r >= 0 && static_cast<std::size_t>(r) < logits->rows(),
            "softmax_cross_entropy: row index out of range");
    const int lab = labels[static_cast<std::size_t>(r)];
    require(lab >= 0 && static_cast<std::size_t>(lab) < c,
            "softmax_cross_entropy: label out of range");
    double mx = logits->value()(static_cast<std::size_t>(r), 0);
    for (std::size_t j = 1; j < c; ++j)
      mx = std::max(mx, logits->value()(static_cast<std::size_t>(r), j));
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j)
      sum += std::exp(logits->value()(static_cast<std::size_t>(r), j) - mx);
    total += mx + std::log(sum) -
             logits->value()(static_cast<std::size_t>(r), static_cast<std::size_t>(lab));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(rows.size());
  return record("softmax_cross_entropy", std::move(out), logits->requires_grad(),
                [logits, labels, rows](Tensor& o) {
                  const std::size_t c = logits->cols();
                  const double g = o.grad()(0, 0) / static_cast<double>(rows.size());
                  std::vector<double> sm(c);
                  for (int r : rows) {
                    const auto ri = static_cast<std::size_t>(r);
                    double mx = logits->value()(ri, 0);
                    for (std::size_t j = 1; j < c; ++j)
                      mx = std::max(mx, logits->value()(ri, j));
                    double sum = 0.0;
                    for (std::size_t j = 0; j < c; ++j) {
                      sm[j] = std::exp(logits->value()(ri, j) - mx);
                      sum += sm[j];
                    }
                    for (std::size_t j = 0; j < c; ++j) {
                      const double soft = sm[j] / sum;
                      const double target =
                          (j == static_cast<std::size_t>(labels[ri])) ? 1.0 : 0.0;
                      logits->grad()(ri, j) += g * (soft - target);
                    }
                  }
                });
}

void Tape::backward(const TensorPtr& loss) {
  if (backward_done_)
    throw std::logic_error("backward: already run on this record; clear() first");
  require(loss->rows() == 1 && loss->cols() == 1,
          "backward: loss must be scalar (got " + loss->value().shape_str() + ")");
  if (!std::isfinite(loss->scalar()))
    throw std::runtime_error("backward: loss is non-finite");
  backward_done_ = true;
  if (!loss->requires_grad()) return;  // constant loss, nothing to propagate
  loss->grad()(0, 0) = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backprop();
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

Adam::Adam(std::vector<TensorPtr> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr <= 0.0) throw std::invalid_argument("Adam: lr must be > 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p->rows(), p->cols(), 0.0);
    v_.emplace_back(p->rows(), p->cols(), 0.0);
  }
}

void Adam::step() {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = *params_[pi];
    if (!all_finite(p.grad()))
      throw std::runtime_error("Adam::step: non-finite gradient (training diverged)");
    for (std::size_t i = 0; i < p.value().data.size(); ++i) {
      const double g = p.grad().data[i];
      m_[pi].data[i] = cfg_.beta1 * m_[pi].data[i] + (1.0 - cfg_.beta1) * g;
      v_[pi].data[i] = cfg_.beta2 * v_[pi].data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[pi].data[i] / bc1;
      const double vhat = v_[pi].data[i] / bc2;
      double upd = cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      if (cfg_.weight_decay > 0.0) upd += cfg_.lr * cfg_.weight_decay * p.value().data[i];
      p.value().data[i] -= upd;
    }
  }
}

void Adam::zero_grad() {
  for (const auto& p : params_) p->zero_grad();
}

}  // namespace ganx::diff
