#pragma once

// Brute-force references for validating the greedy engine on small problems.

#include <cstddef>

#include "gdm/problem.hpp"

namespace gdm::oracle {

/// Unweighted loss decrease from the best update of `object` (a singleton
/// entry, or every entry of a row), obtained by explicit least squares on the
/// affected coordinates and direct loss evaluation. Singleton results are
/// cross-checked against a golden-section search; a disagreement throws
/// NumericalError.
double gain_oracle(const MultiTaskProblem& problem, const CoefficientMatrix& beta, const SupportObject& object);

/// Loss decrease for entry (i, j) found by golden-section search over gamma.
double golden_section_gain(const MultiTaskProblem& problem, const CoefficientMatrix& beta, std::size_t feature,
                           std::size_t task);

struct ExhaustiveResult {
  SupportPattern pattern;
  CoefficientMatrix beta;
  double loss = 0.0;
};

/// Number of patterns `exhaustive_best_fit` would visit.
double exhaustive_pattern_count(std::size_t features, std::size_t tasks, std::size_t max_singletons,
                                std::size_t max_rows);

/// Loss-minimizing pattern with at most `max_rows` rows and `max_singletons`
/// singletons off those rows. Row sets are enumerated first, then singleton
/// sets, each by size and then lexicographically; the first minimizer wins.
/// Throws EnumerationLimit above 1e6 patterns.
ExhaustiveResult exhaustive_best_fit(const MultiTaskProblem& problem, std::size_t max_singletons,
                                     std::size_t max_rows);

}  // namespace gdm::oracle
