#include "gdm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gdm/engine.hpp"
#include "gdm/errors.hpp"

namespace gdm::oracle {

namespace {

constexpr double kMaxPatterns = 1e6;

DenseMatrix single_column(const DenseMatrix& x, std::size_t feature) {
  const std::size_t cols[] = {feature};
  return linalg::select_columns(x, cols);
}

// Visits every k-subset of {0..n-1} in lexicographic order.
void for_each_combination(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) out = out * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return std::round(out);
}

}  // namespace

double golden_section_gain(const MultiTaskProblem& problem, const CoefficientMatrix& beta, std::size_t feature,
                           std::size_t task) {
  require(feature < problem.features() && task < problem.task_count(), "golden_section_gain: index out of range");
  const double base = loss(problem, beta);
  const auto& x = problem.task(task).X;
  const DenseVector column = x.column(feature);
  const double col_norm = std::sqrt(linalg::squared_norm(column.span()));
  if (col_norm == 0.0) return 0.0;
  const auto res = residuals(problem, beta);
  const double scale = 1.0 + std::sqrt(linalg::squared_norm(res[task].span())) / col_norm;

  CoefficientMatrix trial = beta;
  auto objective = [&](double gamma) {
    trial(feature, task) = beta(feature, task) + gamma;
    return loss(problem, trial);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -1e10 * scale;
  double hi = 1e10 * scale;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  for (int it = 0; it < 400 && hi - lo > 1e-13 * scale; ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }
  const double best = std::min({fa, fb, objective(0.5 * (lo + hi)), base});
  return base - best;
}

double gain_oracle(const MultiTaskProblem& problem, const CoefficientMatrix& beta, const SupportObject& object) {
  require(object.feature < problem.features(), "gain_oracle: feature out of range");
  const double base = loss(problem, beta);
  const auto res = residuals(problem, beta);
  CoefficientMatrix updated = beta;

  if (object.kind == ObjectKind::kSingleton) {
    require(object.task < problem.task_count(), "gain_oracle: task out of range");
    const DenseMatrix col = single_column(problem.task(object.task).X, object.feature);
    const DenseVector step = linalg::solve_least_squares(col, res[object.task].span());
    updated(object.feature, object.task) += step[0];
    const double gain = base - loss(problem, updated);
    const double searched = golden_section_gain(problem, beta, object.feature, object.task);
    if (std::abs(searched - gain) > 1e-7 * (1.0 + std::abs(gain)))
      throw NumericalError("gain_oracle: least-squares gain " + std::to_string(gain) +
                           " disagrees with golden-section gain " + std::to_string(searched));
    return gain;
  }

  for (std::size_t j = 0; j < problem.task_count(); ++j) {
    const DenseMatrix col = single_column(problem.task(j).X, object.feature);
    const DenseVector step = linalg::solve_least_squares(col, res[j].span());
    updated(object.feature, j) += step[0];
  }
  return base - loss(problem, updated);
}

double exhaustive_pattern_count(std::size_t features, std::size_t tasks, std::size_t max_singletons,
                                std::size_t max_rows) {
  double total = 0.0;
  for (std::size_t b = 0; b <= std::min(max_rows, features); ++b) {
    double singles = 0.0;
    for (std::size_t s = 0; s <= max_singletons; ++s) singles += binomial((features - b) * tasks, s);
    total += binomial(features, b) * singles;
  }
  return total;
}

ExhaustiveResult exhaustive_best_fit(const MultiTaskProblem& problem, std::size_t max_singletons,
                                     std::size_t max_rows) {
  const std::size_t p = problem.features();
  const std::size_t r = problem.task_count();
  const double count = exhaustive_pattern_count(p, r, max_singletons, max_rows);
  if (count > kMaxPatterns)
    throw EnumerationLimit("exhaustive_best_fit: " + std::to_string(count) + " patterns exceeds the limit of " +
                           std::to_string(kMaxPatterns));

  std::optional<ExhaustiveResult> best;
  for (std::size_t b = 0; b <= std::min(max_rows, p); ++b) {
    for_each_combination(p, b, [&](const std::vector<std::size_t>& rows) {
      std::vector<Singleton> positions;
      for (std::size_t i = 0; i < p; ++i) {
        if (std::find(rows.begin(), rows.end(), i) != rows.end()) continue;
        for (std::size_t j = 0; j < r; ++j) positions.push_back({i, j});
      }
      for (std::size_t s = 0; s <= max_singletons; ++s) {
        for_each_combination(positions.size(), s, [&](const std::vector<std::size_t>& picks) {
          SupportPattern pattern(p, r);
          for (const std::size_t m : rows) pattern.add_row(m);
          for (const std::size_t k : picks) pattern.add_singleton(positions[k]);
          CoefficientMatrix beta = refit(problem, pattern);
          const double value = loss(problem, beta);
          // Relative tie band keeps the first minimizer among equal losses.
          if (!best || value < best->loss - 1e-12 * best->loss)
            best = ExhaustiveResult{std::move(pattern), std::move(beta), value};
        });
      }
    });
  }
  return std::move(*best);
}

}  // namespace gdm::oracle
