#pragma once

// Shared fixtures for the unit tests: seeded random problems and conversion
// to Eigen, which serves as the independent numerical reference.

#include <Eigen/Dense>
#include <random>

#include "gdm/problem.hpp"

namespace gdm::testing {

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g;
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline DenseVector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  DenseVector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline MultiTaskProblem random_problem(std::mt19937_64& rng, std::size_t p, std::size_t r, std::size_t n) {
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < r; ++j) tasks.push_back({random_matrix(rng, n, p), random_vector(rng, n)});
  return MultiTaskProblem(std::move(tasks));
}

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return out;
}

inline Eigen::VectorXd to_eigen(const DenseVector& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace gdm::testing
