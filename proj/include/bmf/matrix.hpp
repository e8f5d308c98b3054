#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bmf {

// Dense row-major matrix of doubles. Minimal surface: the solvers in this
// repo only need element access, column dots and an SPD solve.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// x_colᵀ y over rows of a row-major matrix.
double col_dot(const Matrix& x, std::size_t col, std::span<const double> y);

// Solves A z = b for symmetric positive definite A (in-place Cholesky on a
// copy). Returns false if a pivot falls below tol, leaving z untouched.
bool cholesky_solve(const Matrix& a, std::span<const double> b, std::vector<double>& z,
                    double tol = 1e-12);

}  // namespace bmf
