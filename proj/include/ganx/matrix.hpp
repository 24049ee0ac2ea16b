#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ganx {

// Dense row-major matrix of doubles. Everything in this project is small
// enough (<= ~1000 nodes per instance) that dense storage is the right
// trade-off; there is deliberately no sparse path.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  std::string shape_str() const;

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
};

bool all_finite(const Matrix& m);
bool approx_equal(const Matrix& a, const Matrix& b, double tol);

// out = a * b. Shapes must already conform.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);
// out (+)= a^T * b
void matmul_at_b_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);
// out (+)= a * b^T
void matmul_a_bt_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate);

}  // namespace ganx
