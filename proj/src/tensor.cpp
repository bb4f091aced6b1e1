// Copyright 2026 The unmt-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unmt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unmt/kernels.hpp"

namespace unmt {

Tensor Tensor::from(std::size_t rows, std::size_t cols,
                    std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw std::invalid_argument("Tensor::from: " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " needs " +
                                std::to_string(rows * cols) + " values, got " +
                                std::to_string(values.size()));
  }
  Tensor t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

std::string Tensor::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace kernels {

namespace {

void check_nn(const Tensor& a, const Tensor& b, const Tensor& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw std::invalid_argument("gemm_nn: " + a.shape_string() + " * " +
                                b.shape_string() + " -> " + c.shape_string());
  }
}
void check_tn(const Tensor& a, const Tensor& b, const Tensor& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw std::invalid_argument("gemm_tn: " + a.shape_string() + "^T * " +
                                b.shape_string() + " -> " + c.shape_string());
  }
}
void check_nt(const Tensor& a, const Tensor& b, const Tensor& c) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows()) {
    throw std::invalid_argument("gemm_nt: " + a.shape_string() + " * " +
                                b.shape_string() + "^T -> " + c.shape_string());
  }
}

// Row kernels shared by the serial and OpenMP flavours.
inline void nn_row(const Tensor& a, const Tensor& b, Tensor& c,
                   std::size_t i) {
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.cols();
  const double* arow = a.row(i).data();
  double* crow = c.row(i).data();
  for (std::size_t k = 0; k < k_dim; ++k) {
    const double av = arow[k];
    if (av == 0.0) continue;
    const double* brow = b.row(k).data();
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void tn_row(const Tensor& a, const Tensor& b, Tensor& c,
                   std::size_t i) {
  // c(i, :) += sum_r a(r, i) * b(r, :)
  const std::size_t n = b.cols();
  double* crow = c.row(i).data();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double av = a(r, i);
    if (av == 0.0) continue;
    const double* brow = b.row(r).data();
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void nt_row(const Tensor& a, const Tensor& b, Tensor& c,
                   std::size_t i) {
  const std::size_t k_dim = a.cols();
  const double* arow = a.row(i).data();
  double* crow = c.row(i).data();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.row(j).data();
    double s = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k) s += arow[k] * brow[k];
    crow[j] += s;
  }
}

template <class RowFn>
void omp_rows(std::size_t rows, RowFn&& fn) {
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace

namespace serial {
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  check_nn(a, b, c);
  for (std::size_t i = 0; i < a.rows(); ++i) nn_row(a, b, c, i);
}
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c) {
  check_tn(a, b, c);
  for (std::size_t i = 0; i < a.cols(); ++i) tn_row(a, b, c, i);
}
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c) {
  check_nt(a, b, c);
  for (std::size_t i = 0; i < a.rows(); ++i) nt_row(a, b, c, i);
}
}  // namespace serial

namespace omp {
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  check_nn(a, b, c);
  omp_rows(a.rows(), [&](std::size_t i) { nn_row(a, b, c, i); });
}
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c) {
  check_tn(a, b, c);
  omp_rows(a.cols(), [&](std::size_t i) { tn_row(a, b, c, i); });
}
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c) {
  check_nt(a, b, c);
  omp_rows(a.rows(), [&](std::size_t i) { nt_row(a, b, c, i); });
}
}  // namespace omp

}  // namespace kernels
}  // namespace unmt
