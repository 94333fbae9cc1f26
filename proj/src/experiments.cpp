#include "gdm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gdm/engine.hpp"
#include "gdm/errors.hpp"
#include "gdm/parallel.hpp"
#include "gdm/seeding.hpp"

namespace gdm::experiments {

std::size_t SynthSpec::support_size() const {
  return s != 0 ? s : static_cast<std::size_t>(std::lround(static_cast<double>(p) / 10.0));
}

std::size_t SynthSpec::shared_count() const {
  return static_cast<std::size_t>(std::lround(kappa * static_cast<double>(support_size())));
}

void SynthSpec::validate() const {
  require(p >= 1 && r >= 1, "SynthSpec: p and r must be >= 1");
  require(n >= 1, "SynthSpec: n must be >= 1");
  require(kappa >= 0.0 && kappa <= 1.0, "SynthSpec: kappa must lie in [0, 1]");
  require(noise_variance >= 0.0 && std::isfinite(noise_variance), "SynthSpec: noise variance must be >= 0");
  const std::size_t sz = support_size();
  const std::size_t shared = shared_count();
  require(shared <= sz, "SynthSpec: shared count exceeds support size");
  require(shared + r * (sz - shared) <= p, "SynthSpec: supports need " + std::to_string(shared + r * (sz - shared)) +
                                               " distinct features but p = " + std::to_string(p));
}

namespace {

struct Draw {
  CoefficientMatrix beta;
  std::vector<Task> train;
  std::vector<Task> holdout;
};

Draw draw(const SynthSpec& spec, std::size_t holdout_samples) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t sz = spec.support_size();
  const std::size_t shared = spec.shared_count();
  const std::size_t own = sz - shared;

  std::vector<std::size_t> order(spec.p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Draw out;
  out.beta = CoefficientMatrix(spec.p, spec.r);
  std::size_t next = 0;
  for (std::size_t k = 0; k < shared; ++k, ++next)
    for (std::size_t j = 0; j < spec.r; ++j) out.beta(order[next], j) = normal(rng);
  for (std::size_t j = 0; j < spec.r; ++j)
    for (std::size_t k = 0; k < own; ++k, ++next) out.beta(order[next], j) = normal(rng);

  const double sigma = std::sqrt(spec.noise_variance);
  const std::size_t total = spec.n + holdout_samples;
  for (std::size_t j = 0; j < spec.r; ++j) {
    DenseMatrix x(total, spec.p);
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t f = 0; f < spec.p; ++f) x(i, f) = normal(rng);
    DenseVector y = linalg::multiply(x, out.beta.column(j).span());
    for (std::size_t i = 0; i < total; ++i) y[i] += sigma * normal(rng);

    std::vector<double> train_x(x.values().begin(), x.values().begin() + static_cast<std::ptrdiff_t>(spec.n * spec.p));
    std::vector<double> train_y(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(spec.n));
    out.train.push_back({DenseMatrix(spec.n, spec.p, std::move(train_x)), DenseVector(std::move(train_y))});
    if (holdout_samples > 0) {
      std::vector<double> hx(x.values().begin() + static_cast<std::ptrdiff_t>(spec.n * spec.p), x.values().end());
      std::vector<double> hy(y.begin() + static_cast<std::ptrdiff_t>(spec.n), y.end());
      out.holdout.push_back({DenseMatrix(holdout_samples, spec.p, std::move(hx)), DenseVector(std::move(hy))});
    }
  }
  return out;
}

}  // namespace

SyntheticInstance gen_synthetic(const SynthSpec& spec) {
  Draw d = draw(spec, 0);
  return {MultiTaskProblem(std::move(d.train)), std::move(d.beta)};
}

SyntheticSplit gen_synthetic_split(const SynthSpec& spec, std::size_t holdout_samples) {
  require(holdout_samples >= 1, "gen_synthetic_split: holdout must have at least one sample");
  Draw d = draw(spec, holdout_samples);
  return {{MultiTaskProblem(std::move(d.train)), std::move(d.beta)}, MultiTaskProblem(std::move(d.holdout))};
}

namespace {

double theta_log_argument(std::size_t s, std::size_t p, double kappa) {
  const double arg = static_cast<double>(p) - (2.0 - kappa) * static_cast<double>(s);
  require(arg > 1.0, "theta: p - (2 - kappa) s must exceed 1");
  return std::log(arg);
}

}  // namespace

double theta(std::size_t n, std::size_t s, std::size_t p, double kappa) {
  require(s >= 1, "theta: s must be >= 1");
  return static_cast<double>(n) / (static_cast<double>(s) * theta_log_argument(s, p, kappa));
}

std::size_t n_for_theta(double t, std::size_t s, std::size_t p, double kappa) {
  require(s >= 1 && t > 0.0, "n_for_theta: requires s >= 1 and theta > 0");
  const double exact = t * static_cast<double>(s) * theta_log_argument(s, p, kappa);
  auto n = static_cast<std::size_t>(std::ceil(exact));
  while (theta(n, s, p, kappa) < t) ++n;
  return std::max<std::size_t>(n, 1);
}

bool sign_support_success(const CoefficientMatrix& beta_hat, const CoefficientMatrix& beta_star) {
  require(beta_hat.features() == beta_star.features() && beta_hat.tasks() == beta_star.tasks(),
          "sign_support_success: shape mismatch");
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (std::size_t k = 0; k < beta_hat.values().size(); ++k)
    if (sign(beta_hat.values()[k]) != sign(beta_star.values()[k])) return false;
  return true;
}

double epsilon_for(double c, std::size_t s, std::size_t p, double n) {
  require(n > 0.0, "epsilon_for: n must be positive");
  return c * static_cast<double>(s) * std::log(static_cast<double>(p)) / n;
}

std::uint64_t trial_seed(std::uint64_t master_seed, double kappa, std::size_t theta_index, std::size_t trial_index) {
  return derive_seed({master_seed, seed_bits(kappa), theta_index, trial_index});
}

namespace {

GreedyConfig sweep_config(const SweepSettings& settings, std::size_t s, std::size_t n) {
  GreedyConfig config;
  config.epsilon = epsilon_for(settings.epsilon_c, s, settings.p, static_cast<double>(n));
  config.w = settings.w;
  config.nu = settings.nu;
  config.rows_enabled = settings.rows_enabled;
  config.max_forward_steps = settings.max_forward_steps;
  return config;
}

SynthSpec spec_for(const SweepSettings& settings, std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.p = settings.p;
  spec.r = settings.r;
  spec.s = settings.s;
  spec.kappa = settings.kappa;
  spec.n = n;
  spec.noise_variance = settings.noise_variance;
  spec.seed = seed;
  return spec;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSettings& settings) {
  require(settings.trials >= 1, "run_sweep: trials must be >= 1");
  require(!settings.theta_grid.empty(), "run_sweep: theta grid is empty");
  const std::size_t s = spec_for(settings, 1, 0).support_size();
  const std::size_t thetas = settings.theta_grid.size();

  std::vector<std::size_t> ns(thetas);
  for (std::size_t t = 0; t < thetas; ++t) ns[t] = n_for_theta(settings.theta_grid[t], s, settings.p, settings.kappa);

  struct Outcome {
    bool success = false;
    double error = 0.0;
  };
  std::vector<Outcome> outcomes(thetas * settings.trials);
  parallel_for(
      outcomes.size(),
      [&](std::size_t k) {
        const std::size_t t = k / settings.trials;
        const std::size_t trial = k % settings.trials;
        const auto instance = gen_synthetic(spec_for(settings, ns[t], trial_seed(settings.master_seed, settings.kappa, t, trial)));
        const FitReport report = fit(instance.problem, sweep_config(settings, s, ns[t]));
        outcomes[k] = {sign_support_success(report.coefficients, instance.beta_star),
                       frobenius_distance(report.coefficients, instance.beta_star)};
      },
      settings.threads);

  std::vector<SweepRow> rows;
  for (std::size_t t = 0; t < thetas; ++t) {
    SweepRow row;
    row.kappa = settings.kappa;
    row.theta = settings.theta_grid[t];
    row.n = ns[t];
    row.trials = settings.trials;
    double error_sum = 0.0;
    for (std::size_t trial = 0; trial < settings.trials; ++trial) {
      const auto& o = outcomes[t * settings.trials + trial];
      row.successes += o.success ? 1 : 0;
      error_sum += o.error;
    }
    row.success_rate = static_cast<double>(row.successes) / static_cast<double>(row.trials);
    row.mean_frob_error = error_sum / static_cast<double>(row.trials);
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, "make_grid: requires step > 0 and hi >= lo");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
  // Snap to 12 decimals so 0.2 + 2 * 0.2 prints as 0.6.
  for (std::size_t k = 0; k <= count; ++k) out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
  return out;
}

std::optional<double> transition_threshold(const std::vector<SweepRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double rate = rows[k].success_rate;
    if (rate < 0.5) continue;
    if (k == 0) {
      if (rate == 0.5) return rows[k].theta;
      continue;
    }
    const double prev = rows[k - 1].success_rate;
    if (prev < 0.5) {
      const double frac = (0.5 - prev) / (rate - prev);
      return rows[k - 1].theta + frac * (rows[k].theta - rows[k - 1].theta);
    }
  }
  return std::nullopt;
}

CrossValidationResult cross_validate(const MultiTaskProblem& train, const MultiTaskProblem& holdout,
                                     const std::vector<double>& c_grid, const std::vector<double>& w_grid,
                                     std::size_t s_hint, const GreedyConfig& base) {
  require(!c_grid.empty() && !w_grid.empty(), "cross_validate: grids must be non-empty");
  require(s_hint >= 1, "cross_validate: s_hint must be >= 1");
  require(holdout.features() == train.features() && holdout.task_count() == train.task_count(),
          "cross_validate: holdout shape does not match training problem");

  double mean_n = 0.0;
  for (std::size_t j = 0; j < train.task_count(); ++j) mean_n += static_cast<double>(train.samples(j));
  mean_n /= static_cast<double>(train.task_count());

  std::vector<double> cs = c_grid;
  std::vector<double> ws = w_grid;
  std::sort(cs.begin(), cs.end());
  std::sort(ws.begin(), ws.end());

  CrossValidationResult out;
  std::optional<std::size_t> best;
  for (const double c : cs) {
    for (const double w : ws) {
      GreedyConfig config = base;
      config.epsilon = epsilon_for(c, s_hint, train.features(), mean_n);
      config.w = w;
      const FitReport report = fit(train, config);
      out.report.push_back({c, w, config.epsilon, loss(holdout, report.coefficients)});
      if (!best || out.report.back().score < out.report[*best].score) best = out.report.size() - 1;
    }
  }
  out.c = out.report[*best].c;
  out.w = out.report[*best].w;
  out.epsilon = out.report[*best].epsilon;
  return out;
}

CrossValidationResult calibrate(const SweepSettings& sweep, const CalibrationSettings& calibration) {
  require(calibration.instances >= 1, "calibrate: at least one instance is required");
  const std::size_t s = spec_for(sweep, 1, 0).support_size();
  const std::size_t n = n_for_theta(calibration.theta, s, sweep.p, sweep.kappa);
  GreedyConfig base = sweep_config(sweep, s, n);

  std::vector<CrossValidationResult> parts(calibration.instances);
  parallel_for(
      parts.size(),
      [&](std::size_t k) {
        const auto split =
            gen_synthetic_split(spec_for(sweep, n, derive_seed({calibration.seed, seed_bits(sweep.kappa), k})), n);
        parts[k] = cross_validate(split.train.problem, split.holdout, calibration.c_grid, calibration.w_grid, s, base);
      },
      sweep.threads);

  CrossValidationResult out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k)
    for (std::size_t g = 0; g < out.report.size(); ++g) out.report[g].score += parts[k].report[g].score;
  std::size_t best = 0;
  for (std::size_t g = 1; g < out.report.size(); ++g)
    if (out.report[g].score < out.report[best].score) best = g;
  out.c = out.report[best].c;
  out.w = out.report[best].w;
  out.epsilon = out.report[best].epsilon;
  return out;
}

FitReport foba_single_task(const MultiTaskProblem& problem, const GreedyConfig& config) {
  GreedyConfig single = config;
  single.rows_enabled = false;
  return fit(problem, single);
}

}  // namespace gdm::experiments
