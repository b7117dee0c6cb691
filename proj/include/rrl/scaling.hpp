#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrl/model.hpp"
#include "rrl/training.hpp"

namespace rrl::scaling {

struct SweepConfig {
  model::NetworkSpec student;
  model::NetworkParams teacher;
  double sigma = 0.0;
  std::vector<std::size_t> n_grid;    // strictly increasing
  std::vector<std::uint64_t> seeds;   // base seed per repetition
  std::size_t test_size = 10000;
  training::TrainConfig train;
  // Optional fixed starting point for every student (empty = fresh seeded
  // initialization per cell).
  model::NetworkParams student_warm_start;

  void validate() const;  // throws std::invalid_argument
};

struct SeriesRow {
  std::size_t n = 0;
  std::size_t seed_index = 0;
  double test_error = 0.0;
};

struct AggregateRow {
  std::size_t n = 0;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample std / sqrt(count); 0 when count == 1
  std::size_t count = 0;
};

struct ErrorSeries {
  std::vector<SeriesRow> rows;
  std::vector<AggregateRow> aggregate;
};

// Trains one fresh student per (n, seed) cell on a fresh training set and
// evaluates on a single shared test set. Cell seeds derive from
// (base_seed, n, seed_index) only, so execution order and worker count do not
// affect the output.
ErrorSeries run_sweep(const SweepConfig& config);

std::vector<AggregateRow> aggregate(const std::vector<SeriesRow>& rows);

// CSV schemas (single header line, LF endings, 17 significant digits):
//   rows:      n,seed_index,test_error
//   aggregate: n,mean_error,std_error,count
std::string rows_csv(const std::vector<SeriesRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& aggregate);

void save_series(const ErrorSeries& series, const std::string& path);
ErrorSeries load_series(const std::string& path);

// Parsers used by both save/load and the fit command; throw std::runtime_error
// naming the offending line on malformed input.
std::vector<SeriesRow> parse_rows_csv(const std::string& text);
std::vector<AggregateRow> parse_aggregate_csv(const std::string& text);

// JSON sweep configuration (the CLI contract); see README for the schema.
SweepConfig config_from_json(const std::string& text);
std::string config_to_json(const SweepConfig& config);

}  // namespace rrl::scaling
