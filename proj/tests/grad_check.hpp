#pragma once

// Central finite-difference oracle for gradient checks. Independent of the
// backward pass: it only evaluates forward losses at perturbed inputs.

#include <cmath>
#include <functional>
#include <vector>

#include "ganx/tape.hpp"

namespace gradcheck {

using LossBuilder = std::function<ganx::diff::TensorPtr(
    ganx::diff::Tape&, const std::vector<ganx::diff::TensorPtr>&)>;

inline double eval_loss(const LossBuilder& build, const std::vector<ganx::Matrix>& values) {
  ganx::diff::Tape tape(false);
  std::vector<ganx::diff::TensorPtr> leaves;
  leaves.reserve(values.size());
  for (const auto& v : values) leaves.push_back(ganx::diff::Tensor::make(v, false));
  return build(tape, leaves)->scalar();
}

// Max scaled gradient error over every entry of every leaf. The denominator
// is floored at 1e-3, so a result <= 1e-4 means relative error <= 1e-4 at
// normal magnitudes and absolute error <= 1e-7 near zero.
inline double max_grad_error(const LossBuilder& build, const std::vector<ganx::Matrix>& values,
                             double h = 1e-5) {
  std::vector<ganx::diff::TensorPtr> leaves;
  leaves.reserve(values.size());
  for (const auto& v : values) leaves.push_back(ganx::diff::Tensor::parameter(v));
  ganx::diff::Tape tape;
  tape.backward(build(tape, leaves));

  double max_err = 0.0;
  std::vector<ganx::Matrix> perturbed = values;
  for (std::size_t li = 0; li < values.size(); ++li) {
    for (std::size_t i = 0; i < values[li].data.size(); ++i) {
      const double orig = perturbed[li].data[i];
      perturbed[li].data[i] = orig + h;
      const double f_plus = eval_loss(build, perturbed);
      perturbed[li].data[i] = orig - h;
      const double f_minus = eval_loss(build, perturbed);
      perturbed[li].data[i] = orig;
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double analytic = leaves[li]->grad().data[i];
      const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-3});
      max_err = std::max(max_err, std::abs(fd - analytic) / scale);
    }
  }
  return max_err;
}

}  // namespace gradcheck
