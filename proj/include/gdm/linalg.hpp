#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gdm::linalg {

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t length, double fill = 0.0) : data_(length, fill) {}
  explicit DenseVector(std::vector<double> values) : data_(std::move(values)) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool all_finite() const;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> data_;
};

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) { return std::span<double>(data_).subspan(i * cols_, cols_); }

  DenseVector column(std::size_t j) const;
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

/// A x
DenseVector multiply(const DenseMatrix& a, std::span<const double> x);
/// A^T v
DenseVector multiply_transpose(const DenseMatrix& a, std::span<const double> v);

DenseMatrix select_columns(const DenseMatrix& a, std::span<const std::size_t> columns);
DenseMatrix transpose(const DenseMatrix& a);

/// Minimizer of ||A x - b||_2. Uses Householder QR with column pivoting; when
/// A is numerically rank deficient (|R_kk| <= 1e-10 |R_00|) the minimum-norm
/// minimizer is returned.
DenseVector solve_least_squares(const DenseMatrix& a, std::span<const double> b);

struct SingularValueRange {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest singular values via one-sided Jacobi. Intended for
/// small matrices. For a wide matrix (rows < cols) the smallest singular
/// value over the column space is zero.
SingularValueRange singular_value_extremes(const DenseMatrix& a);

}  // namespace gdm::linalg
