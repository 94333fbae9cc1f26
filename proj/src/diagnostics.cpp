#include "gdm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "gdm/errors.hpp"

namespace gdm::diagnostics {

namespace {

std::vector<double> row_magnitudes(const CoefficientMatrix& beta, std::size_t feature) {
  std::vector<double> out;
  for (std::size_t j = 0; j < beta.tasks(); ++j)
    if (beta(feature, j) != 0.0) out.push_back(std::abs(beta(feature, j)));
  return out;
}

}  // namespace

TruthPartition partition_supports(const CoefficientMatrix& beta_star, std::size_t d) {
  require(d >= 1, "partition_supports: d must be >= 1");
  TruthPartition out;
  out.d = d;
  out.s_star.assign(beta_star.tasks(), 0);
  for (std::size_t i = 0; i < beta_star.features(); ++i) {
    const std::size_t count = row_magnitudes(beta_star, i).size();
    if (count >= d) {
      out.shared_rows.insert(i);
      continue;
    }
    for (std::size_t j = 0; j < beta_star.tasks(); ++j)
      if (beta_star(i, j) != 0.0) {
        out.nonshared.insert({i, j});
        ++out.s_star[j];
      }
  }
  for (auto& s : out.s_star) s += out.shared_rows.size();
  out.s_star_max = out.s_star.empty() ? 0 : *std::max_element(out.s_star.begin(), out.s_star.end());
  return out;
}

double beta_min(const CoefficientMatrix& beta_star, std::size_t d) {
  const TruthPartition part = partition_supports(beta_star, d);
  double out = std::numeric_limits<double>::infinity();
  for (const auto& s : part.nonshared) out = std::min(out, std::abs(beta_star(s.feature, s.task)));
  for (const std::size_t m : part.shared_rows) {
    auto mags = row_magnitudes(beta_star, m);
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(d - 1), mags.end(), std::greater<>());
    out = std::min(out, mags[d - 1]);
  }
  return out;
}

double gradient_bound_lambda(const MultiTaskProblem& problem, const CoefficientMatrix& beta_star) {
  const auto res = residuals(problem, beta_star);
  double out = 0.0;
  for (std::size_t j = 0; j < problem.task_count(); ++j) {
    const DenseVector g = linalg::multiply_transpose(problem.task(j).X, res[j].span());
    const double n = static_cast<double>(problem.samples(j));
    for (const double v : g) out = std::max(out, std::abs(v) / n);
  }
  return out;
}

RepConstants rep_constants(const DenseMatrix& x, std::size_t s) {
  const std::size_t p = x.cols();
  require(s >= 1 && s <= p, "rep_constants: sparsity level must lie in [1, p]");
  double subsets = 1.0;
  for (std::size_t i = 0; i < s; ++i) subsets = subsets * static_cast<double>(p - i) / static_cast<double>(i + 1);
  if (std::round(subsets) > kMaxRepSubsets)
    throw EnumerationLimit("rep_constants: C(" + std::to_string(p) + ", " + std::to_string(s) +
                           ") subsets exceeds the limit of " + std::to_string(kMaxRepSubsets));

  const double root_n = std::sqrt(static_cast<double>(x.rows()));
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  std::vector<std::size_t> idx(s);
  for (std::size_t i = 0; i < s; ++i) idx[i] = i;
  while (true) {
    const auto range = linalg::singular_value_extremes(linalg::select_columns(x, idx));
    lower = std::min(lower, range.min / root_n);
    upper = std::max(upper, range.max / root_n);
    std::size_t pos = s;
    while (pos > 0 && idx[pos - 1] == p - s + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < s; ++i) idx[i] = idx[i - 1] + 1;
  }
  RepConstants out{lower, 1.0, upper};
  out.rho = lower > 0.0 ? upper / lower : std::numeric_limits<double>::infinity();
  return out;
}

RepConstants combine(const std::vector<RepConstants>& per_task) {
  require(!per_task.empty(), "combine: no per-task constants");
  RepConstants out{std::numeric_limits<double>::infinity(), 1.0, 0.0};
  for (const auto& c : per_task) {
    out.c_min = std::min(out.c_min, c.c_min);
    out.upper = std::max(out.upper, c.upper);
  }
  out.rho = out.c_min > 0.0 ? out.upper / out.c_min : std::numeric_limits<double>::infinity();
  return out;
}

void TheoremInputs::validate() const {
  require(rho >= 1.0, "TheoremInputs: rho must be >= 1");
  require(c_min > 0.0, "TheoremInputs: C_min must be positive");
  require(w > 0.0 && nu > 0.0, "TheoremInputs: w and nu must be positive");
  require(lambda >= 0.0 && eta >= 0.0 && epsilon >= 0.0, "TheoremInputs: lambda, eta, epsilon must be >= 0");
}

double eta_lower_bound(std::size_t r, double rho, double w, double nu) {
  require(w > 0.0 && nu > 0.0 && rho >= 1.0, "eta_lower_bound: requires w > 0, nu > 0, rho >= 1");
  const double rho2 = rho * rho;
  const double rho4 = rho2 * rho2;
  return 2.0 + 4.0 * static_cast<double>(r) * rho4 * (rho4 - rho2 + 2.0) / (w * nu);
}

double epsilon_lower_bound(const TheoremInputs& in) {
  in.validate();
  const double r = static_cast<double>(in.r);
  return 4.0 * in.rho * in.rho * in.eta * r * r * static_cast<double>(in.s_star) * in.lambda * in.lambda /
         (in.w * in.nu * in.c_min * in.c_min);
}

double error_bound(const TheoremInputs& in) {
  in.validate();
  const double lead = std::sqrt(static_cast<double>(in.r * in.s_star)) / in.c_min;
  return lead * (in.lambda * std::sqrt(in.eta) / in.c_min + 2.0 * in.rho * std::sqrt(in.epsilon));
}

std::size_t union_support_size(const SupportPattern& pattern, const TruthPartition& truth, std::size_t j) {
  require(j < pattern.tasks() && j < truth.s_star.size(), "union_support_size: task out of range");
  std::set<std::size_t> features(truth.shared_rows.begin(), truth.shared_rows.end());
  for (const auto& s : truth.nonshared)
    if (s.task == j) features.insert(s.feature);
  for (const std::size_t f : task_support(pattern, j)) features.insert(f);
  return features.size();
}

}  // namespace gdm::diagnostics
