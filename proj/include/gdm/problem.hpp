#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string_view>
#include <vector>

#include "gdm/linalg.hpp"

namespace gdm {

using linalg::DenseMatrix;
using linalg::DenseVector;

/// One regression task: design X (n x p) and response y (n).
struct Task {
  DenseMatrix X;
  DenseVector y;
};

/// The r design/response pairs of a multi-task regression problem. All tasks
/// share the feature count p; sample counts may differ per task.
class MultiTaskProblem {
 public:
  explicit MultiTaskProblem(std::vector<Task> tasks);

  std::size_t features() const { return features_; }
  std::size_t task_count() const { return tasks_.size(); }
  std::size_t samples(std::size_t j) const { return tasks_[j].y.size(); }
  const Task& task(std::size_t j) const { return tasks_[j]; }
  const std::vector<Task>& tasks() const { return tasks_; }

 private:
  std::size_t features_ = 0;
  std::vector<Task> tasks_;
};

/// Dense p x r coefficient matrix; column j is task j's coefficient vector.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  CoefficientMatrix(std::size_t features, std::size_t tasks)
      : features_(features), tasks_(tasks), data_(features * tasks, 0.0) {}

  std::size_t features() const { return features_; }
  std::size_t tasks() const { return tasks_; }

  double& operator()(std::size_t feature, std::size_t task) { return data_[feature * tasks_ + task]; }
  double operator()(std::size_t feature, std::size_t task) const { return data_[feature * tasks_ + task]; }

  DenseVector column(std::size_t task) const;
  void set_column(std::size_t task, const DenseVector& values);

  const std::vector<double>& values() const { return data_; }
  std::size_t nonzero_count() const;

  friend bool operator==(const CoefficientMatrix&, const CoefficientMatrix&) = default;

 private:
  std::size_t features_ = 0;
  std::size_t tasks_ = 0;
  std::vector<double> data_;
};

double frobenius_distance(const CoefficientMatrix& a, const CoefficientMatrix& b);

/// A single matrix entry (feature i, task j).
struct Singleton {
  std::size_t feature = 0;
  std::size_t task = 0;
  auto operator<=>(const Singleton&) const = default;
};

/// Estimated support: individual entries plus fully shared rows. A singleton
/// never lies on a row that is itself in the pattern; adding a row absorbs
/// the singletons it covers.
class SupportPattern {
 public:
  SupportPattern() = default;
  SupportPattern(std::size_t features, std::size_t tasks) : features_(features), tasks_(tasks) {}

  std::size_t features() const { return features_; }
  std::size_t tasks() const { return tasks_; }

  const std::set<Singleton>& singletons() const { return singletons_; }
  const std::set<std::size_t>& rows() const { return rows_; }

  bool has_singleton(Singleton s) const { return singletons_.contains(s); }
  bool has_row(std::size_t feature) const { return rows_.contains(feature); }
  bool empty() const { return singletons_.empty() && rows_.empty(); }

  void add_singleton(Singleton s);
  void remove_singleton(Singleton s);
  /// Returns the number of singletons absorbed by the new row.
  std::size_t add_row(std::size_t feature);
  void remove_row(std::size_t feature);

  std::size_t singletons_on_feature(std::size_t feature) const;

  friend bool operator==(const SupportPattern&, const SupportPattern&) = default;

 private:
  std::size_t features_ = 0;
  std::size_t tasks_ = 0;
  std::set<Singleton> singletons_;
  std::set<std::size_t> rows_;
};

/// Features active in task j: rows plus that task's singletons, ascending.
std::vector<std::size_t> task_support(const SupportPattern& pattern, std::size_t j);

enum class TieBreak { kLowestIndex };

struct GreedyConfig {
  double epsilon = 1e-4;
  double w = 1.5;
  double nu = 0.5;
  bool rows_enabled = true;
  std::size_t max_forward_steps = 1000;
  TieBreak tie_break = TieBreak::kLowestIndex;
  double comparison_tolerance = 1e-12;

  /// Throws ContractViolation when the configuration is unusable for r tasks.
  void validate(std::size_t tasks) const;

  /// Smallest integer d with d - 1 <= w < d; rows of the singleton set hold
  /// at most d - 1 entries.
  std::size_t sharing_threshold() const;
};

enum class ObjectKind { kSingleton, kRow };

/// A support object handled by the engine. `task` is unused for rows.
struct SupportObject {
  ObjectKind kind = ObjectKind::kSingleton;
  std::size_t feature = 0;
  std::size_t task = 0;

  static SupportObject singleton(std::size_t feature, std::size_t task) {
    return {ObjectKind::kSingleton, feature, task};
  }
  static SupportObject row(std::size_t feature) { return {ObjectKind::kRow, feature, 0}; }

  friend bool operator==(const SupportObject&, const SupportObject&) = default;
};

/// Stack of recorded forward rewards; backward steps are judged against the
/// top entry and pop it when they execute.
class RewardLedger {
 public:
  struct Entry {
    double reward = 0.0;
    ObjectKind kind = ObjectKind::kSingleton;
  };

  void push(double reward, ObjectKind kind) { stack_.push_back({reward, kind}); }
  Entry pop();
  const Entry& top() const;
  std::size_t depth() const { return stack_.size(); }
  bool empty() const { return stack_.empty(); }
  const std::vector<Entry>& entries() const { return stack_; }

 private:
  std::vector<Entry> stack_;
};

enum class StepKind { kForward, kBackward };

struct StepRecord {
  StepKind kind = StepKind::kForward;
  SupportObject object;
  /// Forward: recorded weighted reward. Backward: weighted cost.
  double value = 0.0;
  double loss_after = 0.0;
};

enum class Termination { kGainBelowThreshold, kMaxSteps };

std::string_view to_string(Termination t);
std::string_view to_string(StepKind k);
std::string_view to_string(ObjectKind k);

struct FitReport {
  CoefficientMatrix coefficients;
  SupportPattern pattern;
  double final_loss = 0.0;
  std::vector<StepRecord> steps;
  Termination termination = Termination::kGainBelowThreshold;
};

/// L(beta) = sum_j 1/(2 n_j) ||y_j - X_j beta_j||^2
double loss(const MultiTaskProblem& problem, const CoefficientMatrix& beta);

/// Residual y_j - X_j beta_j for every task.
std::vector<DenseVector> residuals(const MultiTaskProblem& problem, const CoefficientMatrix& beta);

/// Task j alone as an r = 1 problem.
MultiTaskProblem single_task(const MultiTaskProblem& problem, std::size_t j);

}  // namespace gdm
