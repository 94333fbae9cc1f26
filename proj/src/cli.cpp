#include "gdm/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gdm/diagnostics.hpp"
#include "gdm/digits.hpp"
#include "gdm/engine.hpp"
#include "gdm/errors.hpp"
#include "gdm/experiments.hpp"
#include "gdm/io.hpp"
#include "gdm/parallel.hpp"
#include "gdm/seeding.hpp"

namespace gdm::cli {

namespace {

using io::Json;

struct GenOptions {
  std::size_t p = 0;
  std::size_t r = 2;
  std::size_t s = 0;
  double kappa = 0.0;
  std::size_t n = 0;
  double noise_variance = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitOptions {
  std::string in;
  double epsilon = 1e-4;
  double w = 1.5;
  double nu = 0.5;
  bool no_rows = false;
  std::size_t max_steps = 1000;
  std::string out;
};

struct SweepOptions {
  std::size_t p = 128;
  std::size_t r = 2;
  std::size_t s = 0;
  double kappa = 0.0;
  double theta_min = 0.2;
  double theta_max = 2.0;
  double theta_step = 0.2;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double epsilon_c = 0.01;
  double w = 1.5;
  double nu = 0.5;
  double noise_variance = 0.1;
  bool no_rows = false;
  std::size_t max_steps = 1000;
  std::size_t threads = 0;
  std::string out;
};

struct DiagnoseOptions {
  std::string in;
  std::optional<std::size_t> d;
  std::optional<std::size_t> s;
  double w = 1.5;
  double nu = 0.5;
  std::optional<double> epsilon;
  std::string out;
};

struct DigitsOptions {
  std::string data_dir = "data/mfeat";
  std::size_t n_per_class = 10;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  std::vector<double> c_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> w_grid{1.05, 1.5, 1.95};
  double nu = 0.5;
  std::size_t s_hint = 10;
  std::size_t holdout_per_class = 0;  // 0 = n_per_class / 5, at least 1
  std::size_t max_steps = 1000;
  std::size_t threads = 0;
  std::string out;
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    io::write_text(path, text);
}

int run_gen(const GenOptions& o, std::ostream& out) {
  experiments::SynthSpec spec;
  spec.p = o.p;
  spec.r = o.r;
  spec.s = o.s;
  spec.kappa = o.kappa;
  spec.n = o.n;
  spec.noise_variance = o.noise_variance;
  spec.seed = o.seed;
  auto instance = experiments::gen_synthetic(spec);
  io::ProblemFile file{std::move(instance.problem), std::move(instance.beta_star),
                       io::ProblemMeta{o.seed, o.kappa, spec.support_size(), o.noise_variance}};
  emit(o.out, io::dump(io::to_json(file)), out);
  return kOk;
}

int run_fit(const FitOptions& o, std::ostream& out) {
  const io::ProblemFile file = io::read_problem_file(o.in);
  GreedyConfig config;
  config.epsilon = o.epsilon;
  config.w = o.w;
  config.nu = o.nu;
  config.rows_enabled = !o.no_rows;
  config.max_forward_steps = o.max_steps;
  config.validate(file.problem.task_count());

  const FitReport report = fit(file.problem, config);
  Json doc = io::to_json(report);
  doc["config"] = {{"epsilon", config.epsilon},
                   {"w", config.w},
                   {"nu", config.nu},
                   {"rows_enabled", config.rows_enabled},
                   {"max_forward_steps", config.max_forward_steps}};
  if (file.beta_star) {
    doc["exact_recovery"] = experiments::sign_support_success(report.coefficients, *file.beta_star);
    doc["frobenius_error"] = frobenius_distance(report.coefficients, *file.beta_star);
  }
  emit(o.out, io::dump(doc), out);
  return kOk;
}

int run_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  if (!(o.theta_step > 0.0) || o.theta_max < o.theta_min || o.theta_min <= 0.0) {
    err << "error: empty theta grid (need 0 < theta-min <= theta-max and theta-step > 0)\n";
    return kUsageError;
  }
  experiments::SweepSettings settings;
  settings.p = o.p;
  settings.r = o.r;
  settings.s = o.s;
  settings.kappa = o.kappa;
  settings.noise_variance = o.noise_variance;
  settings.theta_grid = experiments::make_grid(o.theta_min, o.theta_max, o.theta_step);
  settings.trials = o.trials;
  settings.epsilon_c = o.epsilon_c;
  settings.w = o.w;
  settings.nu = o.nu;
  settings.rows_enabled = !o.no_rows;
  settings.max_forward_steps = o.max_steps;
  settings.master_seed = o.seed;
  settings.threads = o.threads;

  // Validate the greedy settings once up front rather than inside a worker.
  GreedyConfig probe;
  probe.w = o.w;
  probe.nu = o.nu;
  probe.rows_enabled = !o.no_rows;
  probe.validate(o.r);

  const auto rows = experiments::run_sweep(settings);
  std::ostringstream csv;
  csv << "kappa,theta,n,trials,successes,success_rate,mean_frob_error\n";
  for (const auto& row : rows) {
    csv << io::format_number(row.kappa) << ',' << io::format_number(row.theta) << ',' << row.n << ',' << row.trials
        << ',' << row.successes << ',' << io::format_number(row.success_rate) << ','
        << io::format_number(row.mean_frob_error) << '\n';
  }
  emit(o.out, csv.str(), out);
  const auto crossing = experiments::transition_threshold(rows);
  out << "theta50=" << (crossing ? io::format_number(*crossing) : std::string("none")) << '\n';
  return kOk;
}

int run_diagnose(const DiagnoseOptions& o, std::ostream& out, std::ostream& err) {
  const io::ProblemFile file = io::read_problem_file(o.in);
  if (!file.beta_star) {
    err << "error: " << o.in << " has no beta_star; diagnose needs the true coefficients\n";
    return kUsageError;
  }
  const auto& problem = file.problem;
  const auto& beta_star = *file.beta_star;
  const std::size_t r = problem.task_count();

  GreedyConfig config;
  config.w = o.w;
  config.nu = o.nu;
  const std::size_t d = o.d.value_or(config.sharing_threshold());
  require(d >= 1, "diagnose: --d must be >= 1");
  require(o.nu > 0.0 && o.nu < 1.0, "diagnose: --nu must lie in (0, 1)");
  require(o.w > 0.0, "diagnose: --w must be positive");

  const auto truth = diagnostics::partition_supports(beta_star, d);
  const double bmin = diagnostics::beta_min(beta_star, d);
  const double lambda = diagnostics::gradient_bound_lambda(problem, beta_star);
  const std::size_t s = o.s.value_or(std::max<std::size_t>(1, truth.s_star_max));

  Json partition;
  partition["d"] = d;
  partition["shared_rows"] = truth.shared_rows;
  Json nonshared = Json::array();
  for (const auto& e : truth.nonshared) nonshared.push_back(Json::array({e.feature, e.task}));
  partition["nonshared"] = std::move(nonshared);
  partition["s_star"] = truth.s_star;
  partition["s_star_max"] = truth.s_star_max;

  Json doc;
  doc["partition"] = std::move(partition);
  doc["beta_min"] = std::isinf(bmin) ? Json(nullptr) : Json(bmin);
  doc["lambda"] = lambda;
  doc["rep_subset_size"] = s;

  std::optional<diagnostics::RepConstants> rep;
  try {
    std::vector<diagnostics::RepConstants> per_task;
    for (const auto& t : problem.tasks()) per_task.push_back(diagnostics::rep_constants(t.X, s));
    rep = diagnostics::combine(per_task);
  } catch (const EnumerationLimit& e) {
    err << "warning: restricted eigenvalue constants not computed: " << e.what() << '\n';
  }

  if (rep && rep->c_min > 0.0) {
    diagnostics::TheoremInputs in;
    in.c_min = rep->c_min;
    in.rho = rep->rho;
    in.lambda = lambda;
    in.eta = diagnostics::eta_lower_bound(r, rep->rho, o.w, o.nu);
    in.w = o.w;
    in.nu = o.nu;
    in.r = r;
    in.s_star = truth.s_star_max;
    const double eps_lower = diagnostics::epsilon_lower_bound(in);
    in.epsilon = o.epsilon.value_or(eps_lower);
    doc["C_min"] = rep->c_min;
    doc["rho"] = rep->rho;
    doc["eta_lower"] = in.eta;
    doc["epsilon_lower"] = eps_lower;
    doc["error_bound"] = diagnostics::error_bound(in);
  } else {
    if (rep) err << "warning: restricted eigenvalue constant is zero; theorem bounds undefined\n";
    doc["C_min"] = rep ? Json(rep->c_min) : Json(nullptr);
    doc["rho"] = nullptr;
    doc["eta_lower"] = nullptr;
    doc["epsilon_lower"] = lambda == 0.0 ? Json(0.0) : Json(nullptr);
    doc["error_bound"] = nullptr;
  }
  emit(o.out, io::dump(doc), out);
  return kOk;
}

struct DigitTrial {
  experiments::CrossValidationResult cv;
  double epsilon = 0.0;
  digits::ClassificationReport report;
};

Json mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {{"mean", mean}, {"stddev", std::sqrt(var)}};
}

int run_digits(const DigitsOptions& o, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir(o.data_dir);
  if (!digits::dataset_present(dir)) {
    err << "error: dataset not found in " << dir.string() << "; expected files:";
    for (const auto& f : digits::kFeatureFiles) err << ' ' << f.name;
    err << '\n';
    return kUsageError;
  }
  require(o.trials >= 1, "digits: --trials must be >= 1");
  require(o.n_per_class >= 2, "digits: --n-per-class must be >= 2 to leave a validation split");
  const std::size_t hold = o.holdout_per_class != 0 ? o.holdout_per_class : std::max<std::size_t>(1, o.n_per_class / 5);
  require(hold < o.n_per_class, "digits: --holdout-per-class must be below --n-per-class");
  for (const double w : o.w_grid) require(w > 1.0 && w < static_cast<double>(digits::kClasses), "digits: w must lie in (1, 10)");

  const digits::DigitDataset dataset = digits::load_mfeat(dir);
  GreedyConfig base;
  base.nu = o.nu;
  base.max_forward_steps = o.max_steps;

  std::vector<DigitTrial> results(o.trials);
  parallel_for(
      o.trials,
      [&](std::size_t t) {
        const auto split = digits::build_tasks(dataset, o.n_per_class, derive_seed({o.seed, t}));
        const auto inner = digits::holdout_split(split.train.task(0).X, split.train_labels, hold);
        DigitTrial trial;
        trial.cv = experiments::cross_validate(inner.train, inner.holdout, o.c_grid, o.w_grid, o.s_hint, base);
        GreedyConfig config = base;
        config.w = trial.cv.w;
        trial.epsilon = experiments::epsilon_for(trial.cv.c, o.s_hint, split.train.features(),
                                                 static_cast<double>(split.train.samples(0)));
        config.epsilon = trial.epsilon;
        trial.report = digits::classify_and_report(fit(split.train, config), split.test);
        results[t] = std::move(trial);
      },
      o.threads);

  std::vector<double> avg_error, error_variance, row_support, support;
  Json details = Json::array();
  std::array<double, digits::kClasses> per_digit{};
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    avg_error.push_back(r.report.avg_error);
    error_variance.push_back(r.report.error_variance);
    row_support.push_back(r.report.avg_row_support);
    support.push_back(r.report.avg_support);
    for (std::size_t j = 0; j < digits::kClasses; ++j) per_digit[j] += r.report.per_digit_errors[j] / static_cast<double>(results.size());
    details.push_back({{"trial", t},
                       {"c", r.cv.c},
                       {"w", r.cv.w},
                       {"epsilon", r.epsilon},
                       {"avg_error", r.report.avg_error},
                       {"error_variance", r.report.error_variance},
                       {"avg_row_support", r.report.avg_row_support},
                       {"avg_support", r.report.avg_support},
                       {"per_digit_errors", r.report.per_digit_errors}});
  }

  Json doc;
  doc["n_per_class"] = o.n_per_class;
  doc["trials"] = o.trials;
  doc["seed"] = o.seed;
  doc["avg_error"] = mean_std(avg_error);
  doc["error_variance"] = mean_std(error_variance);
  doc["avg_row_support"] = mean_std(row_support);
  doc["avg_support"] = mean_std(support);
  doc["per_digit_errors_mean"] = per_digit;
  doc["per_trial"] = std::move(details);
  emit(o.out, io::dump(doc), out);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward-backward greedy estimation of dirty multi-task sparse regression models", "gdm"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic problem file");
  gen_cmd->add_option("--p", gen.p, "Number of features")->required();
  gen_cmd->add_option("--r", gen.r, "Number of tasks")->capture_default_str();
  gen_cmd->add_option("--s", gen.s, "Support size per task (0 = round(p/10))")->capture_default_str();
  gen_cmd->add_option("--kappa", gen.kappa, "Shared fraction of the support")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Samples per task")->required();
  gen_cmd->add_option("--noise-variance", gen.noise_variance, "Noise variance")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output file (default: stdout)");

  FitOptions fo;
  auto* fit_cmd = app.add_subcommand("fit", "Run the greedy estimator on a problem file");
  fit_cmd->add_option("--in", fo.in, "Problem file")->required();
  fit_cmd->add_option("--epsilon", fo.epsilon, "Stopping threshold")->capture_default_str();
  fit_cmd->add_option("--w", fo.w, "Row weight, 1 < w < r")->capture_default_str();
  fit_cmd->add_option("--nu", fo.nu, "Backward factor in (0, 1)")->capture_default_str();
  fit_cmd->add_flag("--no-rows", fo.no_rows, "Disable the row class");
  fit_cmd->add_option("--max-steps", fo.max_steps, "Forward step limit")->capture_default_str();
  fit_cmd->add_option("--out", fo.out, "Output file (default: stdout)");

  SweepOptions so;
  auto* sweep_cmd = app.add_subcommand("sweep", "Success rate of sign-support recovery versus theta");
  sweep_cmd->add_option("--p", so.p, "Number of features")->capture_default_str();
  sweep_cmd->add_option("--r", so.r, "Number of tasks")->capture_default_str();
  sweep_cmd->add_option("--s", so.s, "Support size (0 = round(p/10))")->capture_default_str();
  sweep_cmd->add_option("--kappa", so.kappa, "Shared fraction")->capture_default_str();
  sweep_cmd->add_option("--theta-min", so.theta_min)->capture_default_str();
  sweep_cmd->add_option("--theta-max", so.theta_max)->capture_default_str();
  sweep_cmd->add_option("--theta-step", so.theta_step)->capture_default_str();
  sweep_cmd->add_option("--trials", so.trials)->capture_default_str();
  sweep_cmd->add_option("--seed", so.seed)->capture_default_str();
  sweep_cmd->add_option("--epsilon-c", so.epsilon_c, "epsilon = c s ln(p) / n")->capture_default_str();
  sweep_cmd->add_option("--w", so.w)->capture_default_str();
  sweep_cmd->add_option("--nu", so.nu)->capture_default_str();
  sweep_cmd->add_option("--noise-variance", so.noise_variance)->capture_default_str();
  sweep_cmd->add_flag("--no-rows", so.no_rows, "Per-task greedy (row class disabled)");
  sweep_cmd->add_option("--max-steps", so.max_steps)->capture_default_str();
  sweep_cmd->add_option("--threads", so.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sweep_cmd->add_option("--out", so.out, "CSV output file (default: stdout)");

  DiagnoseOptions dopt;
  auto* diag_cmd = app.add_subcommand("diagnose", "Support partition and theorem constants of a planted problem");
  diag_cmd->add_option("--in", dopt.in, "Problem file with beta_star")->required();
  diag_cmd->add_option("--d", dopt.d, "Sharing threshold (default floor(w) + 1)");
  diag_cmd->add_option("--s", dopt.s, "Subset size for restricted eigenvalues (default max s*_j)");
  diag_cmd->add_option("--w", dopt.w)->capture_default_str();
  diag_cmd->add_option("--nu", dopt.nu)->capture_default_str();
  diag_cmd->add_option("--epsilon", dopt.epsilon, "Threshold used in the error bound (default: its lower bound)");
  diag_cmd->add_option("--out", dopt.out, "Output file (default: stdout)");

  DigitsOptions dig;
  auto* digits_cmd = app.add_subcommand("digits", "One-vs-all handwritten digit experiment");
  digits_cmd->add_option("--data-dir", dig.data_dir, "Directory holding the six mfeat-* files")->capture_default_str();
  digits_cmd->add_option("--n-per-class", dig.n_per_class)->capture_default_str();
  digits_cmd->add_option("--trials", dig.trials)->capture_default_str();
  digits_cmd->add_option("--seed", dig.seed)->capture_default_str();
  digits_cmd->add_option("--epsilon-c-grid", dig.c_grid)->delimiter(',')->capture_default_str();
  digits_cmd->add_option("--w-grid", dig.w_grid)->delimiter(',')->capture_default_str();
  digits_cmd->add_option("--nu", dig.nu)->capture_default_str();
  digits_cmd->add_option("--s-hint", dig.s_hint, "Sparsity used in epsilon = c s ln(p) / n")->capture_default_str();
  digits_cmd->add_option("--holdout-per-class", dig.holdout_per_class, "Validation rows per class (0 = n/5)")
      ->capture_default_str();
  digits_cmd->add_option("--max-steps", dig.max_steps)->capture_default_str();
  digits_cmd->add_option("--threads", dig.threads)->capture_default_str();
  digits_cmd->add_option("--out", dig.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*gen_cmd) return run_gen(gen, out);
    if (*fit_cmd) return run_fit(fo, out);
    if (*sweep_cmd) return run_sweep(so, out, err);
    if (*diag_cmd) return run_diagnose(dopt, out, err);
    if (*digits_cmd) return run_digits(dig, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {  // ContractViolation
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const EnumerationLimit& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kUsageError;
}

}  // namespace gdm::cli
