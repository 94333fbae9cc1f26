#pragma once

// Quantities from the sparsistency analysis: the shared/non-shared split of
// the true support, the minimum signal, the noise gradient bound, restricted
// eigenvalue constants, and the resulting eta / epsilon / error bounds.

#include <cstddef>
#include <set>
#include <vector>

#include "gdm/problem.hpp"

namespace gdm::diagnostics {

struct TruthPartition {
  std::size_t d = 1;
  std::set<std::size_t> shared_rows;
  std::set<Singleton> nonshared;
  std::vector<std::size_t> s_star;
  std::size_t s_star_max = 0;
};

/// Rows with at least d nonzeros are shared; remaining nonzeros are
/// non-shared entries. s*_j = |shared| + |non-shared entries of task j|.
TruthPartition partition_supports(const CoefficientMatrix& beta_star, std::size_t d);

/// Smallest of |beta*| over non-shared entries and of the d-th largest
/// magnitude over shared rows. +infinity when the partition is empty.
double beta_min(const CoefficientMatrix& beta_star, std::size_t d);

/// max_j || (1/n_j) X_j^T (y_j - X_j beta*_j) ||_inf
double gradient_bound_lambda(const MultiTaskProblem& problem, const CoefficientMatrix& beta_star);

struct RepConstants {
  double c_min = 0.0;
  double rho = 1.0;
  double upper = 0.0;  // rho * c_min
};

/// Binomial-size guard for rep_constants.
constexpr double kMaxRepSubsets = 1e5;

/// Extreme singular values of X_S / sqrt(n) over every s-column subset S.
/// Throws EnumerationLimit when C(p, s) exceeds kMaxRepSubsets.
RepConstants rep_constants(const DenseMatrix& x, std::size_t s);

/// Combines per-task constants: smallest lower constant, largest upper one.
RepConstants combine(const std::vector<RepConstants>& per_task);

struct TheoremInputs {
  double c_min = 1.0;
  double rho = 1.0;
  double lambda = 0.0;
  double eta = 2.0;
  double w = 1.0;
  double nu = 0.5;
  std::size_t r = 1;
  std::size_t s_star = 1;
  double epsilon = 0.0;

  void validate() const;
};

/// 2 + 4 r rho^4 (rho^4 - rho^2 + 2) / (w nu)
double eta_lower_bound(std::size_t r, double rho, double w, double nu);

/// 4 rho^2 eta r^2 s* lambda^2 / (w nu C_min^2)
double epsilon_lower_bound(const TheoremInputs& in);

/// sqrt(r s*) / C_min * (lambda sqrt(eta) / C_min + 2 rho sqrt(epsilon))
double error_bound(const TheoremInputs& in);

/// | estimated support of task j  U  true support of task j |
std::size_t union_support_size(const SupportPattern& pattern, const TruthPartition& truth, std::size_t j);

}  // namespace gdm::diagnostics
