#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ganx/matrix.hpp"

namespace ganx::diff {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Value + gradient slot. Shape is fixed at construction; the gradient always
// has the same shape as the value. Tensors with requires_grad == false never
// receive gradient writes, which makes frozen-model parameters safe to share
// across threads.
class Tensor {
 public:
  Tensor(Matrix value, bool requires_grad)
      : value_(std::move(value)),
        grad_(value_.rows, value_.cols, 0.0),
        requires_grad_(requires_grad) {}

  static TensorPtr make(Matrix value, bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(value), requires_grad);
  }
  static TensorPtr parameter(Matrix value) { return make(std::move(value), true); }

  std::size_t rows() const { return value_.rows; }
  std::size_t cols() const { return value_.cols; }

  const Matrix& value() const { return value_; }
  // Mutable access for optimizers and checkpoint loading. The shape must not
  // be changed through this reference.
  Matrix& value() { return value_; }

  const Matrix& grad() const { return grad_; }
  Matrix& grad() { return grad_; }

  bool requires_grad() const { return requires_grad_; }
  void zero_grad() { grad_.fill(0.0); }

  double scalar() const { return value_.data[0]; }

 private:
  Matrix value_;
  Matrix grad_;
  bool requires_grad_;
};

// Reverse-mode record of primitive operations. Ops are recorded in execution
// order, so walking the record backwards is a valid topological traversal
// that visits each node exactly once.
//
// One record per training thread; records are never shared. backward() may be
// called once per record — a second call throws. clear() resets the record
// for the next step (parameter gradients are zeroed separately, via
// Adam::zero_grad or Tensor::zero_grad).
//
// Every forward op validates input shapes (throwing std::invalid_argument
// naming the op and both shapes) and checks its output for NaN/Inf (throwing
// std::runtime_error naming the op).
class Tape {
 public:
  Tape() = default;
  // recording = false evaluates forward values only; nothing is recorded and
  // backward() has nothing to propagate. Used for frozen-model inference.
  explicit Tape(bool recording) : recording_(recording) {}

  TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
  TensorPtr add(const TensorPtr& a, const TensorPtr& b);
  TensorPtr mul(const TensorPtr& a, const TensorPtr& b);  // elementwise; also the masked product
  TensorPtr scale(const TensorPtr& a, double c);
  TensorPtr add_scalar(const TensorPtr& a, double c);
  TensorPtr add_bias(const TensorPtr& a, const TensorPtr& bias);  // bias is 1 x cols
  TensorPtr relu(const TensorPtr& a);
  TensorPtr sigmoid(const TensorPtr& a);
  TensorPtr log(const TensorPtr& a);
  TensorPtr rsqrt(const TensorPtr& a);  // 1/sqrt(x), entries must be > 0
  TensorPtr softmax(const TensorPtr& a);  // row-wise, max-shifted
  TensorPtr row_sum(const TensorPtr& a);    // m x n -> m x 1
  TensorPtr mean_rows(const TensorPtr& a);  // m x n -> 1 x n   (row-mean pooling)
  TensorPtr mean_all(const TensorPtr& a);   // m x n -> 1 x 1
  TensorPtr scale_rows(const TensorPtr& a, const TensorPtr& s);  // s is m x 1
  TensorPtr scale_cols(const TensorPtr& a, const TensorPtr& s);  // s is n x 1
  TensorPtr gather_rows(const TensorPtr& a, std::vector<int> idx);
  // Places v[e] at (i,j) and (j,i) for each undirected edge; other entries 0.
  TensorPtr scatter_symmetric(const TensorPtr& v,
                              std::vector<std::pair<int, int>> edges,
                              std::size_t n);
  TensorPtr detach(const TensorPtr& a);  // value copy, no gradient flow

  // Numerically stabilized log sigmoid(x) / log(1 - sigmoid(x)); finite for
  // every finite input. These are the forms used inside the adversarial
  // losses.
  TensorPtr log_sigmoid(const TensorPtr& a);
  TensorPtr log_one_minus_sigmoid(const TensorPtr& a);

  // Losses (scalar outputs).
  TensorPtr mse(const TensorPtr& a, const TensorPtr& b);
  // Binary cross-entropy of probabilities p against constant targets y;
  // p is clamped away from {0,1} inside.
  TensorPtr bce(const TensorPtr& p, const TensorPtr& y);
  // Mean over `rows` of -log softmax(logits)[r, labels[r]], log-sum-exp form.
  TensorPtr softmax_cross_entropy(const TensorPtr& logits,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& rows);

  // Populates grads of everything the scalar loss depends on.
  void backward(const TensorPtr& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    const char* op;
    std::function<void()> backprop;
  };

  TensorPtr record(const char* op, Matrix out_value, bool needs_grad,
                   std::function<void(Tensor&)> make_backprop);

  std::vector<Node> nodes_;
  bool recording_ = true;
  bool backward_done_ = false;
};

// Stable scalar helpers shared with non-tape code.
double stable_sigmoid(double x);
double softplus(double x);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled; 0 disables
};

// Standard Adam with bias correction. step() reads each parameter's grad and
// throws std::runtime_error on non-finite gradients (training divergence).
class Adam {
 public:
  Adam(std::vector<TensorPtr> params, AdamConfig cfg = {});

  void step();
  void zero_grad();
  const std::vector<TensorPtr>& params() const { return params_; }

 private:
  std::vector<TensorPtr> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig cfg_;
  long step_count_ = 0;
};

}  // namespace ganx::diff
