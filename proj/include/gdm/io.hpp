#pragma once

// JSON documents exchanged by the command-line tool.
//
// Problem file:
//   {"p": .., "r": .., "tasks": [{"n": .., "X": [[..], ..], "y": [..]}, ..],
//    "beta_star": [[..r values..] x p],            (optional)
//    "meta": {"seed", "kappa", "s", "noise_variance"}}  (optional)
//
// Indices in every document are 0-based.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "gdm/problem.hpp"

namespace gdm::io {

using Json = nlohmann::json;

struct ProblemMeta {
  std::uint64_t seed = 0;
  double kappa = 0.0;
  std::size_t s = 0;
  double noise_variance = 0.0;
};

struct ProblemFile {
  MultiTaskProblem problem;
  std::optional<CoefficientMatrix> beta_star;
  std::optional<ProblemMeta> meta;
};

Json to_json(const ProblemFile& file);
/// Throws ParseError describing the first inconsistency.
ProblemFile problem_from_json(const Json& doc);

Json to_json(const CoefficientMatrix& beta);
CoefficientMatrix coefficients_from_json(const Json& doc, std::size_t features, std::size_t tasks);

Json to_json(const SupportPattern& pattern);
Json to_json(const FitReport& report);

/// Pretty-printed document with a trailing newline. Doubles are written in
/// the shortest form that reads back to the same value.
std::string dump(const Json& doc);

/// Shortest round-trip decimal form, locale independent.
std::string format_number(double value);

ProblemFile read_problem_file(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gdm::io
