// Copyright 2026 The PBA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PBA_MATRIX_HPP_
#define PBA_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace pba {

// Dense row-major matrix of doubles. Deliberately small: the library only
// needs element access, rows as spans, and a handful of products.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);

// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& m);

double max_abs_diff(const Matrix& a, const Matrix& b);

double trace(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);

// Solves A x = b for symmetric positive definite A (Cholesky). Throws
// InvalidArgument if A is not numerically SPD.
std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);

}  // namespace pba

#endif  // PBA_MATRIX_HPP_
