#include "ganx/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ganx {

std::string Matrix::shape_str() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%zux%zu", rows, cols);
  return buf;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols)
      throw std::invalid_argument("Matrix::from_rows: ragged rows");
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

bool all_finite(const Matrix& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (std::abs(a.data[i] - b.data[i]) > tol) return false;
  return true;
}

// i-k-j order keeps both b and out row-sequential in the inner loop.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  out.rows = m;
  out.cols = n;
  out.data.assign(m * n, 0.0);
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* po = out.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* orow = po + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  // out[i,j] (+)= sum_k a[k,i] * b[k,j];  a is k x m, b is k x n.
  const std::size_t k = a.rows, m = a.cols, n = b.cols;
  if (!accumulate) {
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0);
  }
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* po = out.data.data();
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* arow = pa + kk * m;
    const double* brow = pb + kk * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  // out[i,j] (+)= dot(a.row(i), b.row(j));  a is m x k, b is n x k.
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  if (!accumulate) {
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0);
  }
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* po = out.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* orow = po + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = pb + j * k;
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      orow[j] += acc;
    }
  }
}

}  // namespace ganx
