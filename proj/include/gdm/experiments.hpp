#pragma once

// Synthetic two-task benchmark: planted supports sharing a kappa fraction,
// Gaussian designs and coefficients, success measured as exact sign-support
// recovery, swept over the rescaled sample size
//   theta = n / (s ln(p - (2 - kappa) s)).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gdm/problem.hpp"

namespace gdm::experiments {

struct SynthSpec {
  std::size_t p = 128;
  std::size_t r = 2;
  std::size_t s = 0;  // 0 selects round(p / 10)
  double kappa = 0.0;
  std::size_t n = 1;
  double noise_variance = 0.1;
  std::uint64_t seed = 0;

  std::size_t support_size() const;
  std::size_t shared_count() const;  // round(kappa * s)
  void validate() const;
};

struct SyntheticInstance {
  MultiTaskProblem problem;
  CoefficientMatrix beta_star;
};

/// Draws round(kappa s) features shared by all tasks plus s - round(kappa s)
/// features private to each task, uniformly without replacement. Nonzero
/// coefficients, design entries are standard normal; noise has the configured
/// variance. Fully determined by the seed.
SyntheticInstance gen_synthetic(const SynthSpec& spec);

/// Like gen_synthetic but with `holdout_samples` extra rows per task, drawn
/// from the same model and returned as a separate problem.
struct SyntheticSplit {
  SyntheticInstance train;
  MultiTaskProblem holdout;
};
SyntheticSplit gen_synthetic_split(const SynthSpec& spec, std::size_t holdout_samples);

/// n / (s ln(p - (2 - kappa) s)), natural log.
double theta(std::size_t n, std::size_t s, std::size_t p, double kappa);
/// Smallest n with theta(n, ...) >= t (and at least 1).
std::size_t n_for_theta(double t, std::size_t s, std::size_t p, double kappa);

/// Exact sign agreement on every entry, zero matched only by exact zero.
bool sign_support_success(const CoefficientMatrix& beta_hat, const CoefficientMatrix& beta_star);

/// epsilon = c s ln(p) / n
double epsilon_for(double c, std::size_t s, std::size_t p, double n);

struct SweepRow {
  double kappa = 0.0;
  double theta = 0.0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_frob_error = 0.0;
};

struct SweepSettings {
  std::size_t p = 128;
  std::size_t r = 2;
  std::size_t s = 0;  // 0 selects round(p / 10)
  double kappa = 0.0;
  double noise_variance = 0.1;
  std::vector<double> theta_grid;
  std::size_t trials = 100;
  double epsilon_c = 0.01;
  double w = 1.5;
  double nu = 0.5;
  bool rows_enabled = true;
  std::size_t max_forward_steps = 1000;
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Seed of one trial: a hash of (master seed, kappa, theta index, trial index).
std::uint64_t trial_seed(std::uint64_t master_seed, double kappa, std::size_t theta_index, std::size_t trial_index);

/// One row per theta; each trial is an independent seeded instance.
std::vector<SweepRow> run_sweep(const SweepSettings& settings);

/// Evenly spaced grid from lo to hi inclusive (within half a step).
std::vector<double> make_grid(double lo, double hi, double step);

/// Linear interpolation of the first 50% crossing of success rate vs theta.
/// nullopt when the rates never span 0.5.
std::optional<double> transition_threshold(const std::vector<SweepRow>& rows);

struct CrossValidationPoint {
  double c = 0.0;
  double w = 0.0;
  double epsilon = 0.0;
  double score = 0.0;
};

struct CrossValidationResult {
  double epsilon = 0.0;
  double c = 0.0;
  double w = 0.0;
  std::vector<CrossValidationPoint> report;
};

/// For every (c, w): epsilon = c s_hint ln(p) / n, fit on `train`, score the
/// holdout loss. Returns the minimizer; ties prefer smaller c, then smaller w.
/// `base` supplies nu, rows flag and step limit.
CrossValidationResult cross_validate(const MultiTaskProblem& train, const MultiTaskProblem& holdout,
                                     const std::vector<double>& c_grid, const std::vector<double>& w_grid,
                                     std::size_t s_hint, const GreedyConfig& base);

struct CalibrationSettings {
  std::vector<double> c_grid;
  std::vector<double> w_grid;
  double theta = 1.0;
  std::size_t instances = 10;
  std::uint64_t seed = 0;
};

/// Chooses one (c, w) for a sweep by summing holdout losses over several
/// calibration instances drawn at `theta` (holdout size equals n).
CrossValidationResult calibrate(const SweepSettings& sweep, const CalibrationSettings& calibration);

/// Forward-backward greedy per task with the row class disabled.
FitReport foba_single_task(const MultiTaskProblem& problem, const GreedyConfig& config);

}  // namespace gdm::experiments
