#include "gdm/digits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "gdm/errors.hpp"

namespace gdm::digits {

namespace {

std::vector<double> parse_line(const std::string& line, const std::string& file, std::size_t line_no) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || !std::isfinite(v))
      throw ParseError(file + ":" + std::to_string(line_no) + ": invalid number near '" +
                       std::string(p, std::min<std::size_t>(static_cast<std::size_t>(end - p), 16)) + "'");
    out.push_back(v);
    p = next;
  }
  return out;
}

}  // namespace

bool dataset_present(const std::filesystem::path& directory) {
  return std::all_of(kFeatureFiles.begin(), kFeatureFiles.end(),
                     [&](const FeatureFile& f) { return std::filesystem::is_regular_file(directory / f.name); });
}

DigitDataset load_mfeat(const std::filesystem::path& directory) {
  DigitDataset out;
  out.features = DenseMatrix(kSamples, kFeatures);
  std::size_t offset = 0;
  for (const auto& spec : kFeatureFiles) {
    const auto path = directory / spec.name;
    const std::string name = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(name + ": cannot open file");
    std::string line;
    std::size_t row = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto values = parse_line(line, name, line_no);
      if (values.empty()) continue;
      if (row >= kSamples) throw ParseError(name + ":" + std::to_string(line_no) + ": more than 2000 data rows");
      if (values.size() != spec.columns)
        throw ParseError(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(spec.columns) +
                         " columns, found " + std::to_string(values.size()));
      for (std::size_t c = 0; c < spec.columns; ++c) out.features(row, offset + c) = values[c];
      ++row;
    }
    if (row != kSamples)
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected 2000 data rows, found " + std::to_string(row));
    offset += spec.columns;
  }

  for (std::size_t c = 0; c < kFeatures; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < kSamples; ++i) mean += out.features(i, c);
    mean /= static_cast<double>(kSamples);
    double var = 0.0;
    for (std::size_t i = 0; i < kSamples; ++i) var += (out.features(i, c) - mean) * (out.features(i, c) - mean);
    var /= static_cast<double>(kSamples);
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < kSamples; ++i)
      out.features(i, c) = sd > 0.0 ? (out.features(i, c) - mean) / sd : 0.0;
  }

  out.labels.resize(kSamples);
  for (std::size_t i = 0; i < kSamples; ++i) out.labels[i] = i / kPerClass;
  return out;
}

MultiTaskProblem one_vs_all_problem(const DenseMatrix& features, const std::vector<std::size_t>& labels,
                                    std::size_t classes) {
  require(features.rows() == labels.size(), "one_vs_all_problem: label count does not match rows");
  std::vector<Task> tasks;
  tasks.reserve(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    DenseVector y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == j ? 1.0 : 0.0;
    tasks.push_back({features, std::move(y)});
  }
  return MultiTaskProblem(std::move(tasks));
}

TaskSplit build_tasks(const DigitDataset& dataset, std::size_t n_per_class, std::uint64_t seed) {
  require(n_per_class >= 1 && n_per_class <= kPerClass, "build_tasks: n_per_class must lie in [1, 200]");
  require(dataset.features.rows() == dataset.labels.size(), "build_tasks: malformed dataset");
  std::mt19937_64 rng(seed);

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t cls = 0; cls < kClasses; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.labels.size(); ++i)
      if (dataset.labels[i] == cls) members.push_back(i);
    require(members.size() >= n_per_class, "build_tasks: class " + std::to_string(cls) + " has too few samples");
    std::shuffle(members.begin(), members.end(), rng);
    train_rows.insert(train_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_per_class));
    test_rows.insert(test_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(n_per_class), members.end());
  }
  std::sort(test_rows.begin(), test_rows.end());

  auto gather = [&](const std::vector<std::size_t>& rows, std::vector<std::size_t>& labels) {
    DenseMatrix x(rows.size(), dataset.features.cols());
    labels.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto src = dataset.features.row(rows[k]);
      std::copy(src.begin(), src.end(), x.row(k).begin());
      labels[k] = dataset.labels[rows[k]];
    }
    return x;
  };

  std::vector<std::size_t> train_labels;
  const DenseMatrix train_x = gather(train_rows, train_labels);
  TestSplit test;
  test.features = gather(test_rows, test.labels);
  return {one_vs_all_problem(train_x, train_labels), std::move(train_labels), std::move(test)};
}

HoldoutSplit holdout_split(const DenseMatrix& features, const std::vector<std::size_t>& labels,
                           std::size_t holdout_per_class, std::size_t classes) {
  require(features.rows() == labels.size(), "holdout_split: label count does not match rows");
  std::vector<std::size_t> seen(classes, 0);
  std::vector<std::size_t> counts(classes, 0);
  for (const std::size_t l : labels) {
    require(l < classes, "holdout_split: label out of range");
    ++counts[l];
  }
  for (std::size_t c = 0; c < classes; ++c)
    require(counts[c] > holdout_per_class, "holdout_split: class " + std::to_string(c) + " too small for holdout");

  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> hold_rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t l = labels[i];
    (seen[l]++ < counts[l] - holdout_per_class ? fit_rows : hold_rows).push_back(i);
  }
  auto gather = [&](const std::vector<std::size_t>& rows) {
    DenseMatrix x(rows.size(), features.cols());
    std::vector<std::size_t> lab(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto src = features.row(rows[k]);
      std::copy(src.begin(), src.end(), x.row(k).begin());
      lab[k] = labels[rows[k]];
    }
    return one_vs_all_problem(x, lab, classes);
  };
  return {gather(fit_rows), gather(hold_rows)};
}

ClassificationReport classify_and_report(const FitReport& fit, const TestSplit& test) {
  const auto& beta = fit.coefficients;
  require(beta.tasks() == kClasses, "classify_and_report: expected 10 task columns");
  require(beta.features() == test.features.cols(), "classify_and_report: feature count mismatch");
  require(test.features.rows() == test.labels.size(), "classify_and_report: label count mismatch");

  std::array<std::size_t, kClasses> wrong{};
  std::array<std::size_t, kClasses> total{};
  for (std::size_t i = 0; i < test.labels.size(); ++i) {
    const auto x = test.features.row(i);
    std::size_t predicted = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < kClasses; ++j) {
      double score = 0.0;
      for (std::size_t f = 0; f < x.size(); ++f) score += x[f] * beta(f, j);
      if (j == 0 || score > best) {
        best = score;
        predicted = j;
      }
    }
    const std::size_t label = test.labels[i];
    require(label < kClasses, "classify_and_report: label out of range");
    ++total[label];
    if (predicted != label) ++wrong[label];
  }

  ClassificationReport out;
  for (std::size_t j = 0; j < kClasses; ++j)
    out.per_digit_errors[j] = total[j] == 0 ? 0.0 : static_cast<double>(wrong[j]) / static_cast<double>(total[j]);
  out.avg_error = std::accumulate(out.per_digit_errors.begin(), out.per_digit_errors.end(), 0.0) / kClasses;
  double var = 0.0;
  for (const double e : out.per_digit_errors) var += (e - out.avg_error) * (e - out.avg_error);
  out.error_variance = var / kClasses;

  std::size_t row_support = 0;
  for (std::size_t f = 0; f < beta.features(); ++f) {
    for (std::size_t j = 0; j < beta.tasks(); ++j)
      if (beta(f, j) != 0.0) {
        ++row_support;
        break;
      }
  }
  out.avg_row_support = static_cast<double>(row_support);
  out.avg_support = static_cast<double>(beta.nonzero_count());
  return out;
}

}  // namespace gdm::digits
