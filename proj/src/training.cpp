#include "rrl/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "rrl/rng.hpp"
#include "rrl/textio.hpp"

namespace rrl::training {

void TrainConfig::validate(std::size_t dataset_size) const {
  if (!(learning_rate >= 0.0))
    throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("TrainConfig: adam betas must lie in (0,1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (batch_size > dataset_size)
    throw std::invalid_argument("TrainConfig: batch_size exceeds dataset size");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
}

Dataset gen_teacher_data(const model::NetworkParams& teacher, std::size_t n, double sigma,
                         std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("gen_teacher_data: sigma must be >= 0");
  if (n < 1) throw std::invalid_argument("gen_teacher_data: n must be >= 1");
  Dataset data;
  data.sigma = sigma;
  data.seed = seed;
  data.inputs = Matrix(n, teacher.input_dim());
  rng::GaussianStream inputs(rng::derive(seed, rng::kTagInputs));
  for (double& v : data.inputs.flat()) v = inputs.next();

  data.targets = forward_batch(teacher, data.inputs);
  if (sigma > 0.0) {
    rng::GaussianStream noise(rng::derive(seed, rng::kTagNoise));
    for (double& v : data.targets.flat()) v += sigma * noise.next();
  }
  return data;
}

double mse_loss(const Matrix& preds, const Matrix& targets) {
  if (preds.rows() != targets.rows() || preds.cols() != targets.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  double total = 0.0;
  const auto n = preds.size();
  const double* p = preds.data();
  const double* t = targets.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = t[i] - p[i];
    total += r * r;
  }
  return total / (static_cast<double>(preds.rows()) * static_cast<double>(preds.cols()));
}

namespace {
void require_one_hot(const Matrix& targets) {
  for (std::size_t r = 0; r < targets.rows(); ++r) {
    std::size_t ones = 0;
    for (double v : targets.row(r)) {
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        throw std::invalid_argument("ce_loss: target rows must be one-hot");
    }
    if (ones != 1) throw std::invalid_argument("ce_loss: target rows must be one-hot");
  }
}

// Row-wise log softmax denominator with max subtraction.
double row_log_sum_exp(std::span<const double> row, double row_max) {
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - row_max);
  return std::log(sum);
}
}  // namespace

double ce_loss(const Matrix& logits, const Matrix& one_hot_targets) {
  if (logits.rows() != one_hot_targets.rows() || logits.cols() != one_hot_targets.cols())
    throw std::invalid_argument("ce_loss: shape mismatch");
  require_one_hot(one_hot_targets);
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double row_max = *std::max_element(row.begin(), row.end());
    const double lse = row_log_sum_exp(row, row_max);
    for (std::size_t k = 0; k < logits.cols(); ++k)
      if (one_hot_targets(r, k) == 1.0) total -= (row[k] - row_max) - lse;
  }
  return total / static_cast<double>(logits.rows());
}

Matrix forward_batch(const model::NetworkParams& params, const Matrix& x) {
  if (params.weights.empty()) throw std::invalid_argument("forward_batch: empty parameter set");
  Matrix h = matmul_abt(x, params.weights.front());
  for (std::size_t l = 1; l < params.weights.size(); ++l) {
    for (double& v : h.flat()) v = v > 0.0 ? v : 0.0;
    h = matmul_abt(h, params.weights[l]);
  }
  return h;
}

double evaluate_loss(const model::NetworkParams& params, const Matrix& x, const Matrix& y,
                     Loss loss) {
  const Matrix preds = forward_batch(params, x);
  return loss == Loss::kMse ? mse_loss(preds, y) : ce_loss(preds, y);
}

std::vector<Matrix> backprop(const model::NetworkParams& params, const Matrix& batch_x,
                             const Matrix& batch_y, Loss loss) {
  const std::size_t layers = params.weights.size();
  if (layers == 0) throw std::invalid_argument("backprop: empty parameter set");
  if (batch_x.rows() != batch_y.rows())
    throw std::invalid_argument("backprop: input/target row mismatch");

  // Forward pass keeping every post-activation (h[0] is the input batch).
  std::vector<Matrix> h(layers + 1);
  h[0] = batch_x;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix a = matmul_abt(h[l], params.weights[l]);
    if (l + 1 < layers) {
      Matrix activated = a;
      for (double& v : activated.flat()) v = v > 0.0 ? v : 0.0;
      h[l + 1] = std::move(activated);
    } else {
      h[l + 1] = std::move(a);
    }
  }

  const Matrix& preds = h[layers];
  if (preds.cols() != batch_y.cols()) throw std::invalid_argument("backprop: target shape mismatch");
  const auto batch = static_cast<double>(batch_x.rows());

  Matrix grad_out(preds.rows(), preds.cols());
  if (loss == Loss::kMse) {
    const double scale = 2.0 / (batch * static_cast<double>(preds.cols()));
    for (std::size_t i = 0; i < preds.size(); ++i)
      grad_out.flat()[i] = scale * (preds.flat()[i] - batch_y.flat()[i]);
  } else {
    require_one_hot(batch_y);
    for (std::size_t r = 0; r < preds.rows(); ++r) {
      const auto row = preds.row(r);
      const double row_max = *std::max_element(row.begin(), row.end());
      double denom = 0.0;
      for (double v : row) denom += std::exp(v - row_max);
      for (std::size_t k = 0; k < preds.cols(); ++k)
        grad_out(r, k) = (std::exp(row[k] - row_max) / denom - batch_y(r, k)) / batch;
    }
  }

  std::vector<Matrix> grads(layers);
  Matrix grad_a = std::move(grad_out);
  for (std::size_t l = layers; l-- > 0;) {
    grads[l] = matmul_atb(grad_a, h[l]);
    if (l == 0) break;
    Matrix grad_h = matmul(grad_a, params.weights[l]);
    // ReLU subgradient: zero at and below the kink.
    for (std::size_t i = 0; i < grad_h.size(); ++i)
      if (h[l].flat()[i] <= 0.0) grad_h.flat()[i] = 0.0;
    grad_a = std::move(grad_h);
  }
  return grads;
}

model::NetworkParams init_params(const model::NetworkSpec& spec, Init scheme,
                                 std::uint64_t seed) {
  spec.validate();
  const auto chain = spec.dim_chain();
  model::NetworkParams params;
  params.weights.reserve(chain.size() - 1);
  for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
    Matrix w(chain[l + 1], chain[l]);
    const std::uint64_t layer_seed = rng::derive(seed, rng::kTagInit, l);
    if (scheme == Init::kUniformGlorot) {
      rng::SplitMix64 gen(layer_seed);
      const double limit =
          std::sqrt(6.0 / static_cast<double>(chain[l] + chain[l + 1]));
      for (double& v : w.flat()) v = limit * (2.0 * gen.next_unit() - 1.0);
    } else {
      rng::GaussianStream gen(layer_seed);
      const double std_dev = std::sqrt(2.0 / static_cast<double>(chain[l]));
      for (double& v : w.flat()) v = std_dev * gen.next();
    }
    params.weights.push_back(std::move(w));
  }
  return params;
}

namespace {
Matrix gather_rows(const Matrix& source, std::span<const std::size_t> idx, std::size_t begin,
                   std::size_t count) {
  Matrix out(count, source.cols());
  for (std::size_t i = 0; i < count; ++i) {
    const auto src = source.row(idx[begin + i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;
};
}  // namespace

TrainReport train(const model::NetworkSpec& student, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config,
                  const model::NetworkParams* warm_start) {
  if (train_set.size() == 0) throw std::invalid_argument("train: empty dataset");
  config.validate(train_set.size());

  model::NetworkParams params =
      warm_start != nullptr
          ? *warm_start
          : init_params(student, config.init, rng::derive(config.seed, rng::kTagInit));
  model::check_shapes(params, student);

  AdamState adam;
  if (config.optimizer == Optimizer::kAdam) {
    for (const Matrix& w : params.weights) {
      adam.m.emplace_back(w.rows(), w.cols());
      adam.v.emplace_back(w.rows(), w.cols());
    }
  }

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng::SplitMix64 shuffle(rng::derive(config.seed, rng::kTagShuffle));

  TrainReport report;
  report.train_loss_history.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[shuffle.next_below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - begin);
      const Matrix bx = gather_rows(train_set.inputs, order, begin, count);
      const Matrix by = gather_rows(train_set.targets, order, begin, count);
      epoch_loss += evaluate_loss(params, bx, by, config.loss) * static_cast<double>(count);
      const std::vector<Matrix> grads = backprop(params, bx, by, config.loss);

      if (config.optimizer == Optimizer::kSgd) {
        for (std::size_t l = 0; l < params.weights.size(); ++l)
          for (std::size_t i = 0; i < grads[l].size(); ++i)
            params.weights[l].flat()[i] -= config.learning_rate * grads[l].flat()[i];
      } else {
        ++adam.t;
        const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.t));
        const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.t));
        for (std::size_t l = 0; l < params.weights.size(); ++l) {
          for (std::size_t i = 0; i < grads[l].size(); ++i) {
            const double g = grads[l].flat()[i];
            double& m = adam.m[l].flat()[i];
            double& v = adam.v[l].flat()[i];
            m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
            v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g * g;
            params.weights[l].flat()[i] -=
                config.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + config.adam_eps);
          }
        }
      }
    }
    report.train_loss_history.push_back(epoch_loss / static_cast<double>(n));
  }

  report.final_params = std::move(params);
  report.test_error =
      evaluate_loss(report.final_params, test_set.inputs, test_set.targets, config.loss);
  return report;
}

std::string report_json(const TrainReport& report) {
  nlohmann::ordered_json doc;
  doc["final_params"] = nlohmann::ordered_json::parse(model::to_json(report.final_params));
  doc["train_loss_history"] = report.train_loss_history;
  doc["test_error"] = report.test_error;
  return doc.dump();
}

std::string loss_history_csv(const TrainReport& report) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < report.train_loss_history.size(); ++e)
    out += std::to_string(e) + "," + textio::format_g17(report.train_loss_history[e]) + "\n";
  return out;
}

}  // namespace rrl::training
