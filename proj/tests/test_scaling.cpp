#include <cmath>
#include <stdexcept>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "rrl/scaling.hpp"
#include "rrl/textio.hpp"
#include "rrl/training.hpp"

namespace scaling = rrl::scaling;
namespace training = rrl::training;
namespace model = rrl::model;

namespace {

scaling::SweepConfig tiny_config() {
  scaling::SweepConfig config;
  config.student.input_dim = 3;
  config.student.hidden_widths = {4};
  config.student.budget_vs = 100.0;
  config.student.budget_v0 = 100.0;
  model::NetworkSpec teacher_spec = config.student;
  config.teacher = training::init_params(teacher_spec, training::Init::kNormalScaled, 13);
  config.sigma = 0.1;
  config.n_grid = {8, 16};
  config.seeds = {1, 2};
  config.test_size = 32;
  config.train.epochs = 2;
  config.train.batch_size = 4;
  return config;
}

// rank correlation between n and mean error
double spearman(const std::vector<scaling::AggregateRow>& aggregate) {
  const std::size_t count = aggregate.size();
  std::vector<double> rank_error(count);
  for (std::size_t i = 0; i < count; ++i) {
    double rank = 1.0;
    for (std::size_t j = 0; j < count; ++j)
      if (aggregate[j].mean_error < aggregate[i].mean_error) rank += 1.0;
    rank_error[i] = rank;
  }
  // n is strictly increasing, so its rank is the index
  const double mean_rank = (static_cast<double>(count) + 1.0) / 2.0;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = static_cast<double>(i + 1) - mean_rank;
    const double b = rank_error[i] - mean_rank;
    cov += a * b;
    var_a += a * a;
    var_b += b * b;
  }
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

TEST_SUITE("scaling") {

TEST_CASE("sweep produces one row per cell, deterministically") {
  const auto config = tiny_config();
  const auto series = scaling::run_sweep(config);
  CHECK(series.rows.size() == 4);
  CHECK(series.aggregate.size() == 2);
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    CHECK(series.rows[i].n == config.n_grid[i / 2]);
    CHECK(series.rows[i].seed_index == i % 2);
  }

  const auto again = scaling::run_sweep(config);
  CHECK(scaling::rows_csv(series.rows) == scaling::rows_csv(again.rows));
  CHECK(scaling::aggregate_csv(series.aggregate) == scaling::aggregate_csv(again.aggregate));
}

TEST_CASE("worker count does not change the output") {
  const auto config = tiny_config();
  setenv("RELU_RATE_LAB_THREADS", "1", 1);
  const auto serial = scaling::run_sweep(config);
  setenv("RELU_RATE_LAB_THREADS", "3", 1);
  const auto threaded = scaling::run_sweep(config);
  unsetenv("RELU_RATE_LAB_THREADS");
  CHECK(scaling::rows_csv(serial.rows) == scaling::rows_csv(threaded.rows));
}

TEST_CASE("warm start at the teacher with lr 0 gives equal errors everywhere") {
  auto config = tiny_config();
  config.student_warm_start = config.teacher;
  config.train.learning_rate = 0.0;

  SUBCASE("noiseless: exactly zero") {
    config.sigma = 0.0;
    const auto series = scaling::run_sweep(config);
    for (const auto& row : series.rows) CHECK(row.test_error == 0.0);
  }

  SUBCASE("noisy: every cell scores the same shared test set") {
    config.sigma = 0.5;
    const auto series = scaling::run_sweep(config);
    for (const auto& row : series.rows)
      CHECK(row.test_error == series.rows.front().test_error);
    CHECK(series.rows.front().test_error > 0.0);
  }
}

TEST_CASE("aggregate statistics") {
  std::vector<scaling::SeriesRow> rows{{500, 0, 0.2}, {500, 1, 0.4}, {1000, 0, 0.1}};
  const auto agg = scaling::aggregate(rows);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].n == 500);
  CHECK(agg[0].mean_error == doctest::Approx(0.3));
  CHECK(agg[0].count == 2);
  // sample std of {0.2, 0.4} is 0.1414..., std error = std / sqrt(2)
  CHECK(agg[0].std_error == doctest::Approx(0.1));
  CHECK(agg[1].count == 1);
  CHECK(agg[1].std_error == 0.0);

  // concatenating shards aggregates like the whole
  std::vector<scaling::SeriesRow> first(rows.begin(), rows.begin() + 2);
  std::vector<scaling::SeriesRow> second(rows.begin() + 2, rows.end());
  std::vector<scaling::SeriesRow> merged = first;
  merged.insert(merged.end(), second.begin(), second.end());
  const auto merged_agg = scaling::aggregate(merged);
  CHECK(scaling::aggregate_csv(merged_agg) == scaling::aggregate_csv(agg));
}

TEST_CASE("series CSV round trip is exact") {
  const auto config = tiny_config();
  const auto series = scaling::run_sweep(config);
  const auto path = std::filesystem::temp_directory_path() / "rrl_series_test.csv";
  scaling::save_series(series, path.string());
  const auto loaded = scaling::load_series(path.string());
  REQUIRE(loaded.rows.size() == series.rows.size());
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    CHECK(loaded.rows[i].n == series.rows[i].n);
    CHECK(loaded.rows[i].seed_index == series.rows[i].seed_index);
    CHECK(loaded.rows[i].test_error == series.rows[i].test_error);
  }
  CHECK(scaling::aggregate_csv(loaded.aggregate) == scaling::aggregate_csv(series.aggregate));
  std::filesystem::remove(path);
}

TEST_CASE("malformed series files are rejected with line numbers") {
  const auto dir = std::filesystem::temp_directory_path();

  const auto header_only = dir / "rrl_header_only.csv";
  rrl::textio::write_file(header_only.string(), "n,seed_index,test_error\n");
  CHECK_THROWS_WITH_AS(scaling::load_series(header_only.string()),
                       doctest::Contains("empty series"), std::runtime_error);

  const auto bad_field = dir / "rrl_bad_field.csv";
  rrl::textio::write_file(bad_field.string(),
                          "n,seed_index,test_error\n500,0,0.25\n600,1,oops\n");
  CHECK_THROWS_WITH_AS(scaling::load_series(bad_field.string()), doctest::Contains("line 3"),
                       std::runtime_error);

  const auto bad_header = dir / "rrl_bad_header.csv";
  rrl::textio::write_file(bad_header.string(), "a,b,c\n1,2,3\n");
  CHECK_THROWS_WITH_AS(scaling::load_series(bad_header.string()), doctest::Contains("line 1"),
                       std::runtime_error);

  const auto duplicate = dir / "rrl_duplicate.csv";
  rrl::textio::write_file(duplicate.string(),
                          "n,seed_index,test_error\n500,0,0.25\n500,0,0.5\n");
  CHECK_THROWS_WITH_AS(scaling::load_series(duplicate.string()),
                       doctest::Contains("duplicate cell"), std::runtime_error);

  for (const auto& p : {header_only, bad_field, bad_header, duplicate})
    std::filesystem::remove(p);
}

TEST_CASE("noiseless realizable sweep has nonincreasing error trend") {
  scaling::SweepConfig config;
  config.student.input_dim = 3;
  config.student.hidden_widths = {6};
  config.student.budget_vs = 100.0;
  config.student.budget_v0 = 100.0;
  model::NetworkSpec teacher_spec = config.student;
  teacher_spec.hidden_widths = {3};  // student capacity covers the teacher
  config.teacher = training::init_params(teacher_spec, training::Init::kNormalScaled, 5);
  config.sigma = 0.0;
  config.n_grid = {16, 64, 256};
  config.seeds = {1, 2};
  config.test_size = 512;
  config.train.epochs = 60;
  config.train.batch_size = 8;
  config.train.learning_rate = 5e-3;

  const auto series = scaling::run_sweep(config);
  CHECK(spearman(series.aggregate) <= 0.0);
}

TEST_CASE("sweep config JSON round trip") {
  const std::string text = R"({
    "student": {"input_dim": 3, "hidden_widths": [4]},
    "teacher": {"seed": 9, "hidden_widths": [2]},
    "sigma": 0.25,
    "n_grid": [8, 32],
    "seeds": [4, 5, 6],
    "test_size": 64,
    "train": {"epochs": 3, "batch_size": 4, "learning_rate": 0.002}
  })";
  const auto config = scaling::config_from_json(text);
  CHECK(config.student.input_dim == 3);
  CHECK(config.teacher.weights.size() == 2);
  CHECK(config.teacher.weights[0].rows() == 2);
  CHECK(config.n_grid == std::vector<std::size_t>{8, 32});
  CHECK(config.train.epochs == 3);

  // canonical echo embeds the resolved teacher and parses back to the same sweep
  const std::string canonical = scaling::config_to_json(config);
  const auto reparsed = scaling::config_from_json(canonical);
  CHECK(reparsed.teacher.weights[0] == config.teacher.weights[0]);
  CHECK(scaling::rows_csv(scaling::run_sweep(reparsed).rows) ==
        scaling::rows_csv(scaling::run_sweep(config).rows));
}

TEST_CASE("sweep config validation errors") {
  auto config = tiny_config();
  config.n_grid = {16, 8};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.n_grid = {8};
  config.seeds.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_THROWS_AS(scaling::config_from_json("{"), std::runtime_error);
  CHECK_THROWS_AS(scaling::config_from_json("{}"), std::runtime_error);
}

}  // TEST_SUITE
