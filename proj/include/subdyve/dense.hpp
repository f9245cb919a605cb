#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "subdyve/kernels.hpp"

namespace subdyve {

// Minimal row-major dense matrix. Heavy products go through the kernel layer.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  std::size_t size() const { return data.size(); }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols == b.rows);
  Matrix c(a.rows, b.cols);
  kernels::matmul(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

// a^T * b without forming a^T when a is tall: kept simple via transpose copy.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  return matmul(transpose(a), b);
}

inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  return matmul(a, transpose(b));
}

}  // namespace subdyve
