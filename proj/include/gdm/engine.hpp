#pragma once

// Forward-backward greedy selection over two object classes: individual
// entries (i, j) and whole rows m of the coefficient matrix.
//
// Forward rewards are loss decreases; row rewards are divided by the sharing
// weight w so a row must beat the best singleton by that factor. Each executed
// forward step records its reward on a ledger. Backward steps remove the
// cheapest object while its weighted cost is at most nu times the reward on
// top of the ledger, popping that entry.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "gdm/problem.hpp"

namespace gdm {

/// Pattern, restricted-optimal coefficients and matching residuals.
class FitState {
 public:
  /// Empty pattern, zero coefficients.
  explicit FitState(const MultiTaskProblem& problem);
  /// Arbitrary state; residuals are computed from `beta`.
  FitState(const MultiTaskProblem& problem, SupportPattern pattern, CoefficientMatrix beta);

  const MultiTaskProblem& problem() const { return *problem_; }
  const SupportPattern& pattern() const { return pattern_; }
  const CoefficientMatrix& beta() const { return beta_; }
  const DenseVector& residual(std::size_t j) const { return residuals_[j]; }
  double column_squared_norm(std::size_t feature, std::size_t task) const {
    return column_sq_norms_[task][feature];
  }
  double loss() const;

  SupportPattern& mutable_pattern() { return pattern_; }

  /// Re-estimates the listed tasks on the current pattern; residuals are
  /// recomputed from scratch.
  void refit_tasks(const std::vector<std::size_t>& tasks);
  void refit_all();

 private:
  const MultiTaskProblem* problem_;
  SupportPattern pattern_;
  CoefficientMatrix beta_;
  std::vector<DenseVector> residuals_;
  std::vector<std::vector<double>> column_sq_norms_;
};

struct SingletonGain {
  double gain = 0.0;
  double step = 0.0;  // optimal gamma
};

struct RowGain {
  double weighted_gain = 0.0;
  std::vector<double> steps;  // optimal alpha, one per task
};

/// Loss decrease from the best update of entry (i, j) alone:
/// (x^T r)^2 / (2 n ||x||^2), zero for an all-zero column.
SingletonGain singleton_gain(const FitState& state, std::size_t feature, std::size_t task);

/// (1/w) times the loss decrease from the best update of row m.
RowGain row_gain(const FitState& state, std::size_t feature, double w);

struct ForwardCandidate {
  SupportObject object;
  double weighted_reward = 0.0;
};

struct BackwardCandidate {
  SupportObject object;
  double weighted_cost = 0.0;
};

/// Best addition. Rows win ties against singletons. Returns nullopt when no
/// candidate remains.
std::optional<ForwardCandidate> best_forward(const FitState& state, const GreedyConfig& config);

/// Loss increase from zeroing entry (i, j), which must be a singleton of the
/// pattern.
double singleton_cost(const FitState& state, std::size_t feature, std::size_t task);

/// (1/w) times the loss increase from zeroing row m, which must be a row of
/// the pattern.
double row_cost(const FitState& state, std::size_t feature, double w);

/// Cheapest removal. Rows win ties (nu_b <= nu_s). Returns nullopt when the
/// pattern is empty.
std::optional<BackwardCandidate> worst_backward(const FitState& state, const GreedyConfig& config);

/// Least-squares coefficients restricted to the pattern, solved per task.
/// Off-support entries are exactly zero.
CoefficientMatrix refit(const MultiTaskProblem& problem, const SupportPattern& pattern);

/// Invoked after every refit inside `fit`.
using FitObserver = std::function<void(const FitState&, const StepRecord&)>;

/// Runs the forward-backward greedy procedure.
///
/// With rows disabled the objective separates by task, so each task is run
/// as its own single-task problem and the reports are merged (task order).
FitReport fit(const MultiTaskProblem& problem, const GreedyConfig& config, const FitObserver& observer = {});

}  // namespace gdm
