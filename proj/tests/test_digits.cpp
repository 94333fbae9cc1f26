#include "doctest.h"

#include <algorithm>
#include <fstream>

#include "gdm/digits.hpp"
#include "gdm/engine.hpp"
#include "gdm/errors.hpp"
#include "digits_fixture.hpp"

using namespace gdm;
using namespace gdm::digits;

namespace {

const std::filesystem::path& fixture_dir() {
  static const auto dir = testing::write_digit_fixture(std::filesystem::temp_directory_path() / "gdm_digits_unit");
  return dir;
}

const DigitDataset& fixture() {
  static const DigitDataset data = load_mfeat(fixture_dir());
  return data;
}

std::filesystem::path copy_fixture(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const auto& f : kFeatureFiles) std::filesystem::copy_file(fixture_dir() / f.name, dir / f.name);
  return dir;
}

}  // namespace

TEST_CASE("loading a well-formed dataset") {
  const auto& data = fixture();
  CHECK(data.features.rows() == 2000);
  CHECK(data.features.cols() == 649);
  for (std::size_t c = 0; c < 10; ++c) CHECK(std::count(data.labels.begin(), data.labels.end(), c) == 200);
  CHECK(data.labels[0] == 0);
  CHECK(data.labels[1999] == 9);

  for (const std::size_t col : {0u, 57u, 648u}) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 2000; ++i) mean += data.features(i, col);
    mean /= 2000.0;
    for (std::size_t i = 0; i < 2000; ++i) sq += (data.features(i, col) - mean) * (data.features(i, col) - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(sq / 2000.0 == doctest::Approx(1.0));
  }
  for (std::size_t i = 0; i < 2000; ++i) REQUIRE(data.features(i, 100) == 0.0);
  CHECK(dataset_present(fixture_dir()));
}

TEST_CASE("loading is deterministic") {
  CHECK(load_mfeat(fixture_dir()).features == fixture().features);
}

TEST_CASE("truncated and malformed files are reported with their names") {
  auto dir = copy_fixture("gdm_digits_truncated");
  {
    std::ifstream in(dir / "mfeat-kar");
    std::string all, line;
    for (int k = 0; k < 1500 && std::getline(in, line); ++k) all += line + "\n";
    in.close();
    std::ofstream(dir / "mfeat-kar") << all;
  }
  try {
    load_mfeat(dir);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("mfeat-kar") != std::string::npos);
  }

  dir = copy_fixture("gdm_digits_badcols");
  {
    std::ofstream out(dir / "mfeat-mor");
    for (int k = 0; k < 2000; ++k) out << (k == 41 ? "1 2 3\n" : "1 2 3 4 5 6\n");
  }
  try {
    load_mfeat(dir);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mfeat-mor:42") != std::string::npos);
  }

  std::filesystem::remove(dir / "mfeat-zer");
  CHECK_FALSE(dataset_present(dir));
  CHECK_THROWS_AS(load_mfeat(dir), ParseError);
}

TEST_CASE("task construction") {
  const auto split = build_tasks(fixture(), 10, 3);
  CHECK(split.train.task_count() == 10);
  CHECK(split.train.samples(0) == 100);
  CHECK(split.test.features.rows() == 1900);
  CHECK(split.test.labels.size() == 1900);
  for (std::size_t i = 0; i < 100; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 10; ++j) sum += split.train.task(j).y[i];
    CHECK(sum == 1.0);
    CHECK(split.train.task(split.train_labels[i]).y[i] == 1.0);
  }
  const auto again = build_tasks(fixture(), 10, 3);
  CHECK(again.train.task(0).X == split.train.task(0).X);
  CHECK(again.test.labels == split.test.labels);
  CHECK_THROWS_AS(build_tasks(fixture(), 0, 1), ContractViolation);
  CHECK_THROWS_AS(build_tasks(fixture(), 201, 1), ContractViolation);
}

TEST_CASE("validation split keeps the last rows of each class") {
  const auto split = build_tasks(fixture(), 10, 4);
  const auto hold = holdout_split(split.train.task(0).X, split.train_labels, 2);
  CHECK(hold.train.samples(0) == 80);
  CHECK(hold.holdout.samples(0) == 20);
  CHECK(hold.holdout.task_count() == 10);
  CHECK_THROWS_AS(holdout_split(split.train.task(0).X, split.train_labels, 10), ContractViolation);
}

TEST_CASE("classification of a zero model") {
  const auto split = build_tasks(fixture(), 10, 5);
  FitReport zero;
  zero.coefficients = CoefficientMatrix(649, 10);
  const auto rep = classify_and_report(zero, split.test);
  CHECK(rep.per_digit_errors[0] == 0.0);
  for (std::size_t j = 1; j < 10; ++j) CHECK(rep.per_digit_errors[j] == 1.0);
  CHECK(rep.avg_error == doctest::Approx(0.9));
  CHECK(rep.error_variance == doctest::Approx(0.09));
  CHECK(rep.avg_row_support == 0.0);
  CHECK(rep.avg_support == 0.0);
}

TEST_CASE("classification of a perfect separator") {
  TestSplit test;
  test.features = DenseMatrix(20, 10);
  for (std::size_t i = 0; i < 20; ++i) {
    test.features(i, i % 10) = 1.0;
    test.labels.push_back(i % 10);
  }
  FitReport model;
  model.coefficients = CoefficientMatrix(10, 10);
  for (std::size_t j = 0; j < 10; ++j) model.coefficients(j, j) = 1.0;
  const auto rep = classify_and_report(model, test);
  CHECK(rep.avg_error == 0.0);
  CHECK(rep.avg_row_support == 10.0);
  CHECK(rep.avg_support == 10.0);

  // Reordering the test rows changes nothing.
  TestSplit reversed;
  reversed.features = DenseMatrix(20, 10);
  for (std::size_t i = 0; i < 20; ++i) {
    reversed.features(i, (19 - i) % 10) = 1.0;
    reversed.labels.push_back((19 - i) % 10);
  }
  model.coefficients(3, 5) = 2.0;  // now digit 3 is confused with 5
  const auto a = classify_and_report(model, test);
  const auto b = classify_and_report(model, reversed);
  CHECK(a.avg_error == b.avg_error);
  CHECK(a.per_digit_errors == b.per_digit_errors);
  CHECK(a.per_digit_errors[3] == 1.0);
}

TEST_CASE("greedy fit on the fixture classifies well") {
  const auto split = build_tasks(fixture(), 20, 6);
  GreedyConfig config;
  config.epsilon = 1e-3;
  config.w = 1.5;
  const auto model = fit(split.train, config);
  const auto rep = classify_and_report(model, split.test);
  CHECK(rep.avg_error < 0.2);
  CHECK(rep.avg_row_support <= rep.avg_support);
  CHECK(rep.avg_support <= 649.0 * 10.0);
}
