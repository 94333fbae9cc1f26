#include "gdm/engine.hpp"

#include <string>

#include "gdm/errors.hpp"

namespace gdm {

namespace {

double gain_from_correlation(double correlation, double column_sq_norm, std::size_t samples) {
  if (column_sq_norm == 0.0) return 0.0;
  return correlation * correlation / (2.0 * static_cast<double>(samples) * column_sq_norm);
}

double column_dot(const DenseMatrix& x, std::size_t feature, const DenseVector& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.rows(); ++k) s += x(k, feature) * v[k];
  return s;
}

// Loss increase of task j when entry `coefficient` on `feature` is zeroed,
// measured against the current residual.
double zeroing_cost(const FitState& state, std::size_t feature, std::size_t task) {
  const double b = state.beta()(feature, task);
  if (b == 0.0) return 0.0;
  const auto& x = state.problem().task(task).X;
  const double xr = column_dot(x, feature, state.residual(task));
  const double n = static_cast<double>(state.problem().samples(task));
  return (2.0 * b * xr + b * b * state.column_squared_norm(feature, task)) / (2.0 * n);
}

bool rows_active(const GreedyConfig& config, std::size_t tasks) { return config.rows_enabled && tasks >= 2; }

DenseVector solve_task(const MultiTaskProblem& problem, const SupportPattern& pattern, std::size_t j,
                       DenseVector* residual) {
  const auto& t = problem.task(j);
  const auto support = task_support(pattern, j);
  DenseVector column(problem.features());
  if (support.empty()) {
    if (residual) *residual = t.y;
    return column;
  }
  const DenseMatrix xs = linalg::select_columns(t.X, support);
  const DenseVector coef = linalg::solve_least_squares(xs, t.y.span());
  if (!coef.all_finite()) throw NumericalError("refit: non-finite least-squares solution in task " + std::to_string(j));
  for (std::size_t k = 0; k < support.size(); ++k) column[support[k]] = coef[k];
  if (residual) {
    const DenseVector fitted = linalg::multiply(xs, coef.span());
    DenseVector r(t.y.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = t.y[i] - fitted[i];
    *residual = std::move(r);
  }
  return column;
}

}  // namespace

FitState::FitState(const MultiTaskProblem& problem)
    : FitState(problem, SupportPattern(problem.features(), problem.task_count()),
               CoefficientMatrix(problem.features(), problem.task_count())) {}

FitState::FitState(const MultiTaskProblem& problem, SupportPattern pattern, CoefficientMatrix beta)
    : problem_(&problem), pattern_(std::move(pattern)), beta_(std::move(beta)) {
  require(pattern_.features() == problem.features() && pattern_.tasks() == problem.task_count(),
          "FitState: pattern shape does not match problem");
  residuals_ = gdm::residuals(problem, beta_);
  column_sq_norms_.resize(problem.task_count());
  for (std::size_t j = 0; j < problem.task_count(); ++j) {
    const auto& x = problem.task(j).X;
    auto& norms = column_sq_norms_[j];
    norms.assign(problem.features(), 0.0);
    for (std::size_t k = 0; k < x.rows(); ++k) {
      const auto row = x.row(k);
      for (std::size_t i = 0; i < row.size(); ++i) norms[i] += row[i] * row[i];
    }
  }
}

double FitState::loss() const {
  double total = 0.0;
  for (std::size_t j = 0; j < residuals_.size(); ++j)
    total += linalg::squared_norm(residuals_[j].span()) / (2.0 * static_cast<double>(problem_->samples(j)));
  return total;
}

void FitState::refit_tasks(const std::vector<std::size_t>& tasks) {
  for (const std::size_t j : tasks) beta_.set_column(j, solve_task(*problem_, pattern_, j, &residuals_[j]));
}

void FitState::refit_all() {
  for (std::size_t j = 0; j < problem_->task_count(); ++j)
    beta_.set_column(j, solve_task(*problem_, pattern_, j, &residuals_[j]));
}

SingletonGain singleton_gain(const FitState& state, std::size_t feature, std::size_t task) {
  const auto& problem = state.problem();
  require(feature < problem.features() && task < problem.task_count(), "singleton_gain: index out of range");
  const double sq = state.column_squared_norm(feature, task);
  if (sq == 0.0) return {};
  const double xr = column_dot(problem.task(task).X, feature, state.residual(task));
  return {gain_from_correlation(xr, sq, problem.samples(task)), xr / sq};
}

RowGain row_gain(const FitState& state, std::size_t feature, double w) {
  require(w > 0.0, "row_gain: w must be positive");
  RowGain out;
  out.steps.resize(state.problem().task_count());
  double total = 0.0;
  for (std::size_t j = 0; j < out.steps.size(); ++j) {
    const auto g = singleton_gain(state, feature, j);
    total += g.gain;
    out.steps[j] = g.step;
  }
  out.weighted_gain = total / w;
  return out;
}

std::optional<ForwardCandidate> best_forward(const FitState& state, const GreedyConfig& config) {
  const auto& problem = state.problem();
  const auto& pattern = state.pattern();
  const std::size_t p = problem.features();
  const std::size_t r = problem.task_count();
  const bool use_rows = rows_active(config, r);

  std::vector<DenseVector> correlation;
  correlation.reserve(r);
  for (std::size_t j = 0; j < r; ++j)
    correlation.push_back(linalg::multiply_transpose(problem.task(j).X, state.residual(j).span()));

  std::optional<ForwardCandidate> best_single;
  std::optional<ForwardCandidate> best_row;
  for (std::size_t i = 0; i < p; ++i) {
    if (pattern.has_row(i)) continue;
    double row_total = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      const double g = gain_from_correlation(correlation[j][i], state.column_squared_norm(i, j), problem.samples(j));
      row_total += g;
      if (pattern.has_singleton({i, j})) continue;
      if (!best_single || g > best_single->weighted_reward)
        best_single = ForwardCandidate{SupportObject::singleton(i, j), g};
    }
    if (use_rows) {
      const double weighted = row_total / config.w;
      if (!best_row || weighted > best_row->weighted_reward)
        best_row = ForwardCandidate{SupportObject::row(i), weighted};
    }
  }

  if (best_row && (!best_single || best_row->weighted_reward >= best_single->weighted_reward)) return best_row;
  return best_single;
}

double singleton_cost(const FitState& state, std::size_t feature, std::size_t task) {
  require(state.pattern().has_singleton({feature, task}),
          "singleton_cost: (" + std::to_string(feature) + ", " + std::to_string(task) + ") is not in the pattern");
  return zeroing_cost(state, feature, task);
}

double row_cost(const FitState& state, std::size_t feature, double w) {
  require(state.pattern().has_row(feature), "row_cost: row " + std::to_string(feature) + " is not in the pattern");
  require(w > 0.0, "row_cost: w must be positive");
  double total = 0.0;
  for (std::size_t j = 0; j < state.problem().task_count(); ++j) total += zeroing_cost(state, feature, j);
  return total / w;
}

std::optional<BackwardCandidate> worst_backward(const FitState& state, const GreedyConfig& config) {
  std::optional<BackwardCandidate> best_single;
  for (const auto& s : state.pattern().singletons()) {
    const double c = zeroing_cost(state, s.feature, s.task);
    if (!best_single || c < best_single->weighted_cost)
      best_single = BackwardCandidate{SupportObject::singleton(s.feature, s.task), c};
  }
  std::optional<BackwardCandidate> best_row;
  for (const std::size_t m : state.pattern().rows()) {
    const double c = row_cost(state, m, config.w);
    if (!best_row || c < best_row->weighted_cost) best_row = BackwardCandidate{SupportObject::row(m), c};
  }
  if (best_row && (!best_single || best_row->weighted_cost <= best_single->weighted_cost)) return best_row;
  return best_single;
}

CoefficientMatrix refit(const MultiTaskProblem& problem, const SupportPattern& pattern) {
  require(pattern.features() == problem.features() && pattern.tasks() == problem.task_count(),
          "refit: pattern shape does not match problem");
  CoefficientMatrix beta(problem.features(), problem.task_count());
  for (std::size_t j = 0; j < problem.task_count(); ++j) beta.set_column(j, solve_task(problem, pattern, j, nullptr));
  return beta;
}

namespace {

std::vector<std::size_t> all_tasks(std::size_t r) {
  std::vector<std::size_t> out(r);
  for (std::size_t j = 0; j < r; ++j) out[j] = j;
  return out;
}

FitReport fit_tasks_separately(const MultiTaskProblem& problem, const GreedyConfig& config,
                               const FitObserver& observer) {
  const std::size_t p = problem.features();
  const std::size_t r = problem.task_count();
  FitReport merged;
  merged.coefficients = CoefficientMatrix(p, r);
  merged.pattern = SupportPattern(p, r);

  std::vector<double> task_loss(r);
  for (std::size_t j = 0; j < r; ++j)
    task_loss[j] = linalg::squared_norm(problem.task(j).y.span()) / (2.0 * static_cast<double>(problem.samples(j)));

  GreedyConfig single = config;
  single.rows_enabled = false;
  for (std::size_t j = 0; j < r; ++j) {
    const MultiTaskProblem sub = single_task(problem, j);
    double others = 0.0;
    for (std::size_t k = 0; k < r; ++k)
      if (k != j) others += task_loss[k];
    FitReport part = fit(sub, single, observer);
    for (std::size_t i = 0; i < p; ++i) merged.coefficients(i, j) = part.coefficients(i, 0);
    for (const auto& s : part.pattern.singletons()) merged.pattern.add_singleton({s.feature, j});
    for (auto step : part.steps) {
      step.object.task = j;
      step.loss_after += others;
      merged.steps.push_back(step);
    }
    task_loss[j] = part.final_loss;
    if (part.termination == Termination::kMaxSteps) merged.termination = Termination::kMaxSteps;
  }
  merged.final_loss = loss(problem, merged.coefficients);
  return merged;
}

}  // namespace

FitReport fit(const MultiTaskProblem& problem, const GreedyConfig& config, const FitObserver& observer) {
  const std::size_t r = problem.task_count();
  config.validate(r);
  if (!rows_active(config, r) && r > 1) return fit_tasks_separately(problem, config, observer);

  const bool use_rows = rows_active(config, r);
  const std::size_t d = config.sharing_threshold();
  const double tol = config.comparison_tolerance;
  const auto every_task = all_tasks(r);

  FitState state(problem);
  RewardLedger ledger;
  FitReport report;
  std::size_t forward_steps = 0;

  auto record = [&](StepKind kind, const SupportObject& object, double value) {
    report.steps.push_back({kind, object, value, state.loss()});
    if (observer) observer(state, report.steps.back());
  };

  while (true) {
    if (forward_steps >= config.max_forward_steps) {
      report.termination = Termination::kMaxSteps;
      break;
    }
    const auto candidate = best_forward(state, config);
    if (!candidate || candidate->weighted_reward <= config.epsilon + tol) {
      report.termination = Termination::kGainBelowThreshold;
      break;
    }

    SupportObject object = candidate->object;
    auto& pattern = state.mutable_pattern();
    if (object.kind == ObjectKind::kSingleton && use_rows &&
        pattern.singletons_on_feature(object.feature) + 1 >= d) {
      // A row may not hold d singletons; the entry arrives as the whole row.
      object = SupportObject::row(object.feature);
    }
    if (object.kind == ObjectKind::kRow) {
      pattern.add_row(object.feature);
      state.refit_tasks(every_task);
    } else {
      pattern.add_singleton({object.feature, object.task});
      state.refit_tasks({object.task});
    }
    ++forward_steps;
    ledger.push(candidate->weighted_reward, object.kind);
    record(StepKind::kForward, object, candidate->weighted_reward);

    while (!ledger.empty()) {
      const auto removal = worst_backward(state, config);
      if (!removal || removal->weighted_cost > config.nu * ledger.top().reward) break;
      const SupportObject& victim = removal->object;
      if (victim.kind == ObjectKind::kRow) {
        pattern.remove_row(victim.feature);
        state.refit_tasks(every_task);
      } else {
        pattern.remove_singleton({victim.feature, victim.task});
        state.refit_tasks({victim.task});
      }
      ledger.pop();
      record(StepKind::kBackward, victim, removal->weighted_cost);
    }
  }

  report.coefficients = state.beta();
  report.pattern = state.pattern();
  report.final_loss = loss(problem, report.coefficients);
  return report;
}

}  // namespace gdm
