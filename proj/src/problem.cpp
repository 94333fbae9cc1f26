#include "gdm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdm/errors.hpp"

namespace gdm {

MultiTaskProblem::MultiTaskProblem(std::vector<Task> tasks) : tasks_(std::move(tasks)) {
  require(!tasks_.empty(), "MultiTaskProblem: at least one task is required");
  features_ = tasks_.front().X.cols();
  require(features_ >= 1, "MultiTaskProblem: at least one feature is required");
  for (std::size_t j = 0; j < tasks_.size(); ++j) {
    const auto& t = tasks_[j];
    const std::string where = "MultiTaskProblem: task " + std::to_string(j);
    require(t.X.cols() == features_, where + " has " + std::to_string(t.X.cols()) +
                                         " columns, expected " + std::to_string(features_));
    require(t.X.rows() >= 1, where + " has no samples");
    require(t.y.size() == t.X.rows(), where + " response length does not match its design rows");
    require(t.X.all_finite() && t.y.all_finite(), where + " contains non-finite values");
  }
}

DenseVector CoefficientMatrix::column(std::size_t task) const {
  require(task < tasks_, "CoefficientMatrix::column: task out of range");
  DenseVector out(features_);
  for (std::size_t i = 0; i < features_; ++i) out[i] = (*this)(i, task);
  return out;
}

void CoefficientMatrix::set_column(std::size_t task, const DenseVector& values) {
  require(task < tasks_ && values.size() == features_, "CoefficientMatrix::set_column: shape mismatch");
  for (std::size_t i = 0; i < features_; ++i) (*this)(i, task) = values[i];
}

std::size_t CoefficientMatrix::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

double frobenius_distance(const CoefficientMatrix& a, const CoefficientMatrix& b) {
  require(a.features() == b.features() && a.tasks() == b.tasks(), "frobenius_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    const double d = a.values()[k] - b.values()[k];
    s += d * d;
  }
  return std::sqrt(s);
}

void SupportPattern::add_singleton(Singleton s) {
  require(s.feature < features_ && s.task < tasks_, "SupportPattern: singleton out of range");
  require(!rows_.contains(s.feature), "SupportPattern: singleton lies on a selected row");
  singletons_.insert(s);
}

void SupportPattern::remove_singleton(Singleton s) {
  require(singletons_.erase(s) == 1, "SupportPattern: singleton not in pattern");
}

std::size_t SupportPattern::add_row(std::size_t feature) {
  require(feature < features_, "SupportPattern: row out of range");
  rows_.insert(feature);
  return std::erase_if(singletons_, [feature](const Singleton& s) { return s.feature == feature; });
}

void SupportPattern::remove_row(std::size_t feature) {
  require(rows_.erase(feature) == 1, "SupportPattern: row not in pattern");
}

std::size_t SupportPattern::singletons_on_feature(std::size_t feature) const {
  auto it = singletons_.lower_bound(Singleton{feature, 0});
  std::size_t count = 0;
  for (; it != singletons_.end() && it->feature == feature; ++it) ++count;
  return count;
}

std::vector<std::size_t> task_support(const SupportPattern& pattern, std::size_t j) {
  require(j < pattern.tasks(), "task_support: task " + std::to_string(j) + " out of range");
  std::vector<std::size_t> out(pattern.rows().begin(), pattern.rows().end());
  for (const auto& s : pattern.singletons())
    if (s.task == j) out.push_back(s.feature);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void GreedyConfig::validate(std::size_t tasks) const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "GreedyConfig: epsilon must be finite and >= 0");
  require(nu > 0.0 && nu < 1.0, "GreedyConfig: nu must lie in (0, 1)");
  require(std::isfinite(w) && w > 0.0, "GreedyConfig: w must be positive");
  require(comparison_tolerance >= 0.0, "GreedyConfig: comparison tolerance must be >= 0");
  if (rows_enabled && tasks >= 2) {
    require(w > 1.0 && w < static_cast<double>(tasks),
            "GreedyConfig: w must lie in (1, " + std::to_string(tasks) + ") when rows are enabled");
  }
}

std::size_t GreedyConfig::sharing_threshold() const {
  return static_cast<std::size_t>(std::floor(w)) + 1;
}

RewardLedger::Entry RewardLedger::pop() {
  require(!stack_.empty(), "RewardLedger: pop on empty ledger");
  Entry e = stack_.back();
  stack_.pop_back();
  return e;
}

const RewardLedger::Entry& RewardLedger::top() const {
  require(!stack_.empty(), "RewardLedger: top on empty ledger");
  return stack_.back();
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kGainBelowThreshold:
      return "gain-below-threshold";
    case Termination::kMaxSteps:
      return "max-steps";
  }
  return "unknown";
}

std::string_view to_string(StepKind k) { return k == StepKind::kForward ? "forward" : "backward"; }

std::string_view to_string(ObjectKind k) { return k == ObjectKind::kSingleton ? "singleton" : "row"; }

std::vector<DenseVector> residuals(const MultiTaskProblem& problem, const CoefficientMatrix& beta) {
  require(beta.features() == problem.features() && beta.tasks() == problem.task_count(),
          "residuals: coefficient shape does not match problem");
  std::vector<DenseVector> out;
  out.reserve(problem.task_count());
  for (std::size_t j = 0; j < problem.task_count(); ++j) {
    const auto& t = problem.task(j);
    const DenseVector fitted = linalg::multiply(t.X, beta.column(j).span());
    DenseVector r(t.y.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = t.y[i] - fitted[i];
    out.push_back(std::move(r));
  }
  return out;
}

double loss(const MultiTaskProblem& problem, const CoefficientMatrix& beta) {
  require(beta.features() == problem.features() && beta.tasks() == problem.task_count(),
          "loss: coefficient shape does not match problem");
  const auto res = residuals(problem, beta);
  double total = 0.0;
  for (std::size_t j = 0; j < res.size(); ++j)
    total += linalg::squared_norm(res[j].span()) / (2.0 * static_cast<double>(problem.samples(j)));
  return total;
}

MultiTaskProblem single_task(const MultiTaskProblem& problem, std::size_t j) {
  require(j < problem.task_count(), "single_task: task out of range");
  return MultiTaskProblem({problem.task(j)});
}

}  // namespace gdm
