#include "gdm/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdm/errors.hpp"

namespace gdm::io {

namespace {

const Json& field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + name + "'");
  return *it;
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": non-finite number");
  return x;
}

std::size_t count(const Json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ParseError(where + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

const Json& array(const Json& v, std::size_t expected, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  if (v.size() != expected)
    throw ParseError(where + ": expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
  return v;
}

Json vector_json(const DenseVector& v) {
  Json out = Json::array();
  for (const double x : v) out.push_back(x);
  return out;
}

Json matrix_json(const DenseMatrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (const double x : m.row(i)) row.push_back(x);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

Json to_json(const CoefficientMatrix& beta) {
  Json out = Json::array();
  for (std::size_t i = 0; i < beta.features(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < beta.tasks(); ++j) row.push_back(beta(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

CoefficientMatrix coefficients_from_json(const Json& doc, std::size_t features, std::size_t tasks) {
  CoefficientMatrix beta(features, tasks);
  array(doc, features, "beta_star");
  for (std::size_t i = 0; i < features; ++i) {
    const std::string where = "beta_star[" + std::to_string(i) + "]";
    const Json& row = array(doc[i], tasks, where);
    for (std::size_t j = 0; j < tasks; ++j) beta(i, j) = number(row[j], where + "[" + std::to_string(j) + "]");
  }
  return beta;
}

Json to_json(const ProblemFile& file) {
  const auto& problem = file.problem;
  Json doc;
  doc["p"] = problem.features();
  doc["r"] = problem.task_count();
  Json tasks = Json::array();
  for (const auto& t : problem.tasks()) {
    Json task;
    task["n"] = t.y.size();
    task["X"] = matrix_json(t.X);
    task["y"] = vector_json(t.y);
    tasks.push_back(std::move(task));
  }
  doc["tasks"] = std::move(tasks);
  if (file.beta_star) doc["beta_star"] = to_json(*file.beta_star);
  if (file.meta) {
    doc["meta"] = {{"seed", file.meta->seed},
                   {"kappa", file.meta->kappa},
                   {"s", file.meta->s},
                   {"noise_variance", file.meta->noise_variance}};
  }
  return doc;
}

ProblemFile problem_from_json(const Json& doc) {
  const std::size_t p = count(field(doc, "p", "problem"), "p");
  const std::size_t r = count(field(doc, "r", "problem"), "r");
  if (p == 0 || r == 0) throw ParseError("problem: p and r must be positive");
  const Json& tasks_json = array(field(doc, "tasks", "problem"), r, "tasks");

  std::vector<Task> tasks;
  tasks.reserve(r);
  for (std::size_t j = 0; j < r; ++j) {
    const std::string where = "tasks[" + std::to_string(j) + "]";
    const Json& t = tasks_json[j];
    const std::size_t n = count(field(t, "n", where), where + ".n");
    if (n == 0) throw ParseError(where + ".n: must be positive");
    const Json& xs = array(field(t, "X", where), n, where + ".X");
    const Json& ys = array(field(t, "y", where), n, where + ".y");
    DenseMatrix x(n, p);
    DenseVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string row_where = where + ".X[" + std::to_string(i) + "]";
      const Json& row = array(xs[i], p, row_where);
      for (std::size_t k = 0; k < p; ++k) x(i, k) = number(row[k], row_where + "[" + std::to_string(k) + "]");
      y[i] = number(ys[i], where + ".y[" + std::to_string(i) + "]");
    }
    tasks.push_back({std::move(x), std::move(y)});
  }

  ProblemFile out{MultiTaskProblem(std::move(tasks)), std::nullopt, std::nullopt};
  if (const auto it = doc.find("beta_star"); it != doc.end() && !it->is_null())
    out.beta_star = coefficients_from_json(*it, p, r);
  if (const auto it = doc.find("meta"); it != doc.end() && !it->is_null()) {
    ProblemMeta meta;
    const Json& m = *it;
    if (!m.is_object()) throw ParseError("meta: expected an object");
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned() && !m["seed"].is_number_integer())
        throw ParseError("meta.seed: expected an integer");
      meta.seed = m["seed"].get<std::uint64_t>();
    }
    if (m.contains("kappa")) meta.kappa = number(m["kappa"], "meta.kappa");
    if (m.contains("s")) meta.s = count(m["s"], "meta.s");
    if (m.contains("noise_variance")) meta.noise_variance = number(m["noise_variance"], "meta.noise_variance");
    out.meta = meta;
  }
  return out;
}

Json to_json(const SupportPattern& pattern) {
  Json rows = Json::array();
  for (const std::size_t f : pattern.rows()) rows.push_back(f);
  Json singles = Json::array();
  for (const auto& s : pattern.singletons()) singles.push_back(Json::array({s.feature, s.task}));
  return {{"rows", std::move(rows)}, {"singletons", std::move(singles)}};
}

Json to_json(const FitReport& report) {
  Json steps = Json::array();
  for (const auto& step : report.steps) {
    Json s;
    s["kind"] = std::string(to_string(step.kind));
    s["object"] = std::string(to_string(step.object.kind));
    s["feature"] = step.object.feature;
    if (step.object.kind == ObjectKind::kSingleton)
      s["task"] = step.object.task;
    else
      s["task"] = nullptr;
    s["value"] = step.value;
    s["loss_after"] = step.loss_after;
    steps.push_back(std::move(s));
  }
  Json doc;
  doc["pattern"] = to_json(report.pattern);
  doc["coefficients"] = to_json(report.coefficients);
  doc["final_loss"] = report.final_loss;
  doc["termination"] = std::string(to_string(report.termination));
  doc["steps"] = std::move(steps);
  return doc;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ProblemFile read_problem_file(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  try {
    return problem_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw ParseError(path.string() + ": write failed");
}

}  // namespace gdm::io
