#include "rrl/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "rrl/parallel.hpp"
#include "rrl/rng.hpp"
#include "rrl/textio.hpp"

namespace rrl::scaling {

void SweepConfig::validate() const {
  student.validate();
  if (teacher.weights.empty()) throw std::invalid_argument("SweepConfig: teacher is empty");
  if (teacher.input_dim() != student.input_dim || teacher.output_dim() != student.output_dim)
    throw std::invalid_argument("SweepConfig: teacher and student dimensions differ");
  if (sigma < 0.0) throw std::invalid_argument("SweepConfig: sigma must be >= 0");
  if (n_grid.empty()) throw std::invalid_argument("SweepConfig: n_grid is empty");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("SweepConfig: n_grid must be strictly increasing");
  if (seeds.empty()) throw std::invalid_argument("SweepConfig: seeds is empty");
  if (test_size < 1) throw std::invalid_argument("SweepConfig: test_size must be >= 1");
  if (!student_warm_start.weights.empty()) model::check_shapes(student_warm_start, student);
  train.validate(n_grid.front());
}

ErrorSeries run_sweep(const SweepConfig& config) {
  config.validate();

  // One test set for the whole sweep; resampling per cell would confound the
  // n trend.
  const training::Dataset test_set = training::gen_teacher_data(
      config.teacher, config.test_size, config.sigma,
      rng::derive(config.seeds.front(), rng::kTagTestSet));

  const std::size_t reps = config.seeds.size();
  const std::size_t cells = config.n_grid.size() * reps;
  ErrorSeries series;
  series.rows.resize(cells);

  par::parallel_for(cells, [&](std::size_t cell) {
    const std::size_t n_index = cell / reps;
    const std::size_t seed_index = cell % reps;
    const std::size_t n = config.n_grid[n_index];
    const std::uint64_t cell_seed =
        rng::derive(config.seeds[seed_index], static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(seed_index));
    try {
      const training::Dataset train_set = training::gen_teacher_data(
          config.teacher, n, config.sigma, rng::derive(cell_seed, rng::kTagData));
      training::TrainConfig cell_config = config.train;
      cell_config.seed = rng::derive(cell_seed, rng::kTagTrain);
      const model::NetworkParams* warm_start =
          config.student_warm_start.weights.empty() ? nullptr : &config.student_warm_start;
      const training::TrainReport report =
          training::train(config.student, train_set, test_set, cell_config, warm_start);
      series.rows[cell] = {n, seed_index, report.test_error};
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep cell (n=" + std::to_string(n) +
                               ", seed_index=" + std::to_string(seed_index) + "): " + e.what());
    }
  });

  series.aggregate = aggregate(series.rows);
  return series;
}

std::vector<AggregateRow> aggregate(const std::vector<SeriesRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  std::vector<AggregateRow> out;
  // Group in first-encounter order of n; rows from run_sweep arrive sorted.
  for (const SeriesRow& row : rows) {
    AggregateRow* slot = nullptr;
    for (AggregateRow& agg : out)
      if (agg.n == row.n) slot = &agg;
    if (slot == nullptr) {
      out.push_back({row.n, 0.0, 0.0, 0});
      slot = &out.back();
    }
    slot->mean_error += row.test_error;
    slot->count += 1;
  }
  for (AggregateRow& agg : out) agg.mean_error /= static_cast<double>(agg.count);
  for (AggregateRow& agg : out) {
    if (agg.count < 2) continue;  // std_error stays 0 by convention
    double ss = 0.0;
    for (const SeriesRow& row : rows) {
      if (row.n != agg.n) continue;
      const double dev = row.test_error - agg.mean_error;
      ss += dev * dev;
    }
    const auto count = static_cast<double>(agg.count);
    agg.std_error = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
  }
  return out;
}

std::string rows_csv(const std::vector<SeriesRow>& rows) {
  std::string out = "n,seed_index,test_error\n";
  for (const SeriesRow& row : rows)
    out += std::to_string(row.n) + "," + std::to_string(row.seed_index) + "," +
           textio::format_g17(row.test_error) + "\n";
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& aggregate) {
  std::string out = "n,mean_error,std_error,count\n";
  for (const AggregateRow& row : aggregate)
    out += std::to_string(row.n) + "," + textio::format_g17(row.mean_error) + "," +
           textio::format_g17(row.std_error) + "," + std::to_string(row.count) + "\n";
  return out;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(begin, end - begin));
    begin = end + 1;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t end = line.find(',', begin);
    if (end == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

double parse_double(const std::string& field, std::size_t line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": not a number: '" + field +
                             "'");
  }
  if (consumed != field.size())
    throw std::runtime_error("line " + std::to_string(line_no) + ": not a number: '" + field +
                             "'");
  return value;
}

std::size_t parse_size(const std::string& field, std::size_t line_no) {
  for (char c : field)
    if (c < '0' || c > '9')
      throw std::runtime_error("line " + std::to_string(line_no) + ": not an integer: '" + field +
                               "'");
  if (field.empty())
    throw std::runtime_error("line " + std::to_string(line_no) + ": empty integer field");
  return static_cast<std::size_t>(std::stoull(field));
}

}  // namespace

std::vector<SeriesRow> parse_rows_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "n,seed_index,test_error")
    throw std::runtime_error("line 1: expected header 'n,seed_index,test_error'");
  std::vector<SeriesRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 3)
      throw std::runtime_error("line " + std::to_string(i + 1) + ": expected 3 fields");
    rows.push_back({parse_size(fields[0], i + 1), parse_size(fields[1], i + 1),
                    parse_double(fields[2], i + 1)});
  }
  return rows;
}

std::vector<AggregateRow> parse_aggregate_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "n,mean_error,std_error,count")
    throw std::runtime_error("line 1: expected header 'n,mean_error,std_error,count'");
  std::vector<AggregateRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 4)
      throw std::runtime_error("line " + std::to_string(i + 1) + ": expected 4 fields");
    rows.push_back({parse_size(fields[0], i + 1), parse_double(fields[1], i + 1),
                    parse_double(fields[2], i + 1), parse_size(fields[3], i + 1)});
  }
  return rows;
}

void save_series(const ErrorSeries& series, const std::string& path) {
  textio::write_file(path, rows_csv(series.rows));
}

ErrorSeries load_series(const std::string& path) {
  ErrorSeries series;
  series.rows = parse_rows_csv(textio::read_file(path));
  if (series.rows.empty()) throw std::runtime_error("load_series: empty series in " + path);
  // duplicate (n, seed_index) cells would make the aggregate ambiguous
  for (std::size_t i = 0; i < series.rows.size(); ++i)
    for (std::size_t j = i + 1; j < series.rows.size(); ++j)
      if (series.rows[i].n == series.rows[j].n &&
          series.rows[i].seed_index == series.rows[j].seed_index)
        throw std::runtime_error("load_series: duplicate cell (n=" +
                                 std::to_string(series.rows[i].n) + ", seed_index=" +
                                 std::to_string(series.rows[i].seed_index) + ")");
  series.aggregate = aggregate(series.rows);
  return series;
}

namespace {

training::Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return training::Optimizer::kSgd;
  if (s == "adam") return training::Optimizer::kAdam;
  throw std::runtime_error("sweep config: unknown optimizer '" + s + "'");
}

training::Loss loss_from_string(const std::string& s) {
  if (s == "mse") return training::Loss::kMse;
  if (s == "cross_entropy") return training::Loss::kCrossEntropy;
  throw std::runtime_error("sweep config: unknown loss '" + s + "'");
}

training::Init init_from_string(const std::string& s) {
  if (s == "uniform_glorot") return training::Init::kUniformGlorot;
  if (s == "normal_scaled") return training::Init::kNormalScaled;
  throw std::runtime_error("sweep config: unknown init '" + s + "'");
}

std::string optimizer_name(training::Optimizer o) {
  return o == training::Optimizer::kSgd ? "sgd" : "adam";
}
std::string loss_name(training::Loss l) {
  return l == training::Loss::kMse ? "mse" : "cross_entropy";
}
std::string init_name(training::Init i) {
  return i == training::Init::kUniformGlorot ? "uniform_glorot" : "normal_scaled";
}

}  // namespace

SweepConfig config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("sweep config: ") + e.what());
  }

  SweepConfig config;
  try {
    const auto& student = doc.at("student");
    config.student.input_dim = student.at("input_dim").get<std::size_t>();
    config.student.hidden_widths = student.at("hidden_widths").get<std::vector<std::size_t>>();
    config.student.output_dim = student.value("output_dim", std::size_t{1});
    config.student.budget_vs = student.value("budget_vs", 1.0);
    config.student.budget_v0 = student.value("budget_v0", 1.0);

    const auto& teacher = doc.at("teacher");
    if (teacher.contains("params")) {
      config.teacher = model::params_from_json(teacher.at("params").dump());
    } else {
      model::NetworkSpec teacher_spec = config.student;
      if (teacher.contains("hidden_widths"))
        teacher_spec.hidden_widths = teacher.at("hidden_widths").get<std::vector<std::size_t>>();
      // Teachers drawn from a seed use the variance-preserving normal init so
      // the signal scale is comparable to the unit-variance inputs.
      config.teacher = training::init_params(teacher_spec, training::Init::kNormalScaled,
                                             teacher.at("seed").get<std::uint64_t>());
    }

    if (doc.contains("student_warm_start"))
      config.student_warm_start = model::params_from_json(doc.at("student_warm_start").dump());

    config.sigma = doc.at("sigma").get<double>();
    config.n_grid = doc.at("n_grid").get<std::vector<std::size_t>>();
    config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    config.test_size = doc.value("test_size", std::size_t{10000});

    if (doc.contains("train")) {
      const auto& train = doc.at("train");
      config.train.optimizer = optimizer_from_string(train.value("optimizer", "adam"));
      config.train.learning_rate = train.value("learning_rate", 1e-3);
      config.train.adam_beta1 = train.value("adam_beta1", 0.9);
      config.train.adam_beta2 = train.value("adam_beta2", 0.999);
      config.train.adam_eps = train.value("adam_eps", 1e-8);
      config.train.batch_size = train.value("batch_size", std::size_t{32});
      config.train.epochs = train.value("epochs", std::size_t{10});
      config.train.loss = loss_from_string(train.value("loss", "mse"));
      config.train.init = init_from_string(train.value("init", "uniform_glorot"));
      config.train.seed = train.value("seed", std::uint64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("sweep config: ") + e.what());
  }
  config.validate();
  return config;
}

std::string config_to_json(const SweepConfig& config) {
  nlohmann::ordered_json doc;
  doc["student"] = {{"input_dim", config.student.input_dim},
                    {"hidden_widths", config.student.hidden_widths},
                    {"output_dim", config.student.output_dim},
                    {"budget_vs", config.student.budget_vs},
                    {"budget_v0", config.student.budget_v0}};
  doc["teacher"] = {{"params", nlohmann::ordered_json::parse(model::to_json(config.teacher))}};
  if (!config.student_warm_start.weights.empty())
    doc["student_warm_start"] =
        nlohmann::ordered_json::parse(model::to_json(config.student_warm_start));
  doc["sigma"] = config.sigma;
  doc["n_grid"] = config.n_grid;
  doc["seeds"] = config.seeds;
  doc["test_size"] = config.test_size;
  doc["train"] = {{"optimizer", optimizer_name(config.train.optimizer)},
                  {"learning_rate", config.train.learning_rate},
                  {"adam_beta1", config.train.adam_beta1},
                  {"adam_beta2", config.train.adam_beta2},
                  {"adam_eps", config.train.adam_eps},
                  {"batch_size", config.train.batch_size},
                  {"epochs", config.train.epochs},
                  {"loss", loss_name(config.train.loss)},
                  {"init", init_name(config.train.init)},
                  {"seed", config.train.seed}};
  return doc.dump(2) + "\n";
}

}  // namespace rrl::scaling
