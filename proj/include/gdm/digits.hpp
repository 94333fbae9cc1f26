#pragma once

// One-vs-all digit classification on the six-file "multiple features"
// handwritten numerals dataset: 2000 samples (200 per digit, class-ordered),
// 649 features. Every digit is a task sharing one design matrix with 0/1
// indicator responses.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "gdm/problem.hpp"

namespace gdm::digits {

inline constexpr std::size_t kClasses = 10;
inline constexpr std::size_t kPerClass = 200;
inline constexpr std::size_t kSamples = kClasses * kPerClass;
inline constexpr std::size_t kFeatures = 649;

struct FeatureFile {
  std::string_view name;
  std::size_t columns;
};

/// Files in column-concatenation order.
inline constexpr std::array<FeatureFile, 6> kFeatureFiles{{
    {"mfeat-fac", 216},
    {"mfeat-fou", 76},
    {"mfeat-kar", 64},
    {"mfeat-mor", 6},
    {"mfeat-pix", 240},
    {"mfeat-zer", 47},
}};

struct DigitDataset {
  DenseMatrix features;              // kSamples x kFeatures, standardized
  std::vector<std::size_t> labels;   // 0..9
};

/// Reads and concatenates the six files, labels by 200-row blocks, and
/// standardizes every column (constant columns become zero). Throws ParseError
/// naming the file and line on malformed input.
DigitDataset load_mfeat(const std::filesystem::path& directory);

/// True when all six files exist in `directory`.
bool dataset_present(const std::filesystem::path& directory);

struct TestSplit {
  DenseMatrix features;
  std::vector<std::size_t> labels;
};

struct TaskSplit {
  MultiTaskProblem train;
  std::vector<std::size_t> train_labels;
  TestSplit test;
};

/// Samples n_per_class training rows of every digit without replacement;
/// all ten tasks share that design with indicator responses. Remaining rows
/// form the test split.
TaskSplit build_tasks(const DigitDataset& dataset, std::size_t n_per_class, std::uint64_t seed);

/// Same construction from an explicit design/label pair (any class sizes).
MultiTaskProblem one_vs_all_problem(const DenseMatrix& features, const std::vector<std::size_t>& labels,
                                    std::size_t classes = kClasses);

/// Splits a one-vs-all training set for validation: the last
/// `holdout_per_class` rows of each class (in training order) form the
/// holdout problem.
struct HoldoutSplit {
  MultiTaskProblem train;
  MultiTaskProblem holdout;
};
HoldoutSplit holdout_split(const DenseMatrix& features, const std::vector<std::size_t>& labels,
                           std::size_t holdout_per_class, std::size_t classes = kClasses);

struct ClassificationReport {
  double avg_error = 0.0;
  double error_variance = 0.0;
  double avg_row_support = 0.0;
  double avg_support = 0.0;
  std::array<double, kClasses> per_digit_errors{};
};

/// Predicts argmax_j x^T beta_j (ties to the lower class). Row support counts
/// features nonzero in any task; support counts all nonzeros.
ClassificationReport classify_and_report(const FitReport& fit, const TestSplit& test);

}  // namespace gdm::digits
